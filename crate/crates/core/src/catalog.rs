//! Weierstrass-Enneper data: the holomorphic functions `R(w)` of the
//! standard minimal-surface catalog, their derivatives and singular sets.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GridKind, ParamGrid};
use crate::quadrature::PathIntegrand;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurfaceId {
    Enneper,
    Catenoid,
    RightHelicoid,
    GeneralHelicoid,
    Scherk,
    GeneralScherk,
    Henneberg,
    GeneralEnneper,
    SchwarzRiemann,
    Custom,
}

impl SurfaceId {
    /// The nine built-in catalog entries.
    pub const CATALOG: [SurfaceId; 9] = [
        SurfaceId::Enneper,
        SurfaceId::Catenoid,
        SurfaceId::RightHelicoid,
        SurfaceId::GeneralHelicoid,
        SurfaceId::Scherk,
        SurfaceId::GeneralScherk,
        SurfaceId::Henneberg,
        SurfaceId::GeneralEnneper,
        SurfaceId::SchwarzRiemann,
    ];

    pub const ALL: [SurfaceId; 10] = [
        SurfaceId::Enneper,
        SurfaceId::Catenoid,
        SurfaceId::RightHelicoid,
        SurfaceId::GeneralHelicoid,
        SurfaceId::Scherk,
        SurfaceId::GeneralScherk,
        SurfaceId::Henneberg,
        SurfaceId::GeneralEnneper,
        SurfaceId::SchwarzRiemann,
        SurfaceId::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SurfaceId::Enneper => "enneper",
            SurfaceId::Catenoid => "catenoid",
            SurfaceId::RightHelicoid => "right_helicoid",
            SurfaceId::GeneralHelicoid => "general_helicoid",
            SurfaceId::Scherk => "scherk",
            SurfaceId::GeneralScherk => "general_scherk",
            SurfaceId::Henneberg => "henneberg",
            SurfaceId::GeneralEnneper => "general_enneper",
            SurfaceId::SchwarzRiemann => "schwarz_riemann",
            SurfaceId::Custom => "custom",
        }
    }

    pub fn valid_ids() -> String {
        SurfaceId::ALL.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for SurfaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SurfaceId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        SurfaceId::ALL.into_iter().find(|id| id.as_str() == key).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "unknown surface id '{s}'; valid ids: {}",
                SurfaceId::valid_ids()
            ))
        })
    }
}

/// Catalog entry with its parameters. Custom rational functions store
/// coefficients in ascending powers of `w`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeKind {
    Enneper,
    Catenoid {
        kappa: f64,
    },
    RightHelicoid {
        kappa: f64,
    },
    GeneralHelicoid {
        kappa: f64,
        alpha: f64,
    },
    Scherk,
    GeneralScherk {
        a: f64,
        alpha: f64,
    },
    Henneberg,
    GeneralEnneper {
        a: f64,
        b: f64,
    },
    SchwarzRiemann,
    Custom {
        numerator: Vec<Complex64>,
        denominator: Vec<Complex64>,
    },
}

/// Named parameters as they appear in configuration files and flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeParams {
    pub kappa: Option<f64>,
    pub alpha: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub numerator: Option<Vec<Complex64>>,
    pub denominator: Option<Vec<Complex64>>,
}

/// `R(w)` times a unit-modulus conjugation phase.
#[derive(Debug, Clone, PartialEq)]
pub struct WeFunction {
    kind: WeKind,
    phase: Complex64,
    poles: Vec<Complex64>,
}

/// Suggested parameter domain and integration base point for a surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefaultDomain {
    pub kind: GridKind,
    pub base: Complex64,
}

impl DefaultDomain {
    /// Grid over the domain with `n` nodes per axis.
    pub fn grid(&self, n: usize) -> Result<ParamGrid> {
        match self.kind {
            GridKind::Rectangle { r1, r2 } => ParamGrid::rectangle(r1, r2, n, n),
            GridKind::Annulus { rho, angle } => ParamGrid::annular_sector(rho, angle, n, n),
        }
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite")))
    }
}

impl WeFunction {
    pub fn new(kind: WeKind) -> Result<Self> {
        let poles = match &kind {
            WeKind::Catenoid { kappa } | WeKind::RightHelicoid { kappa } => {
                finite("kappa", *kappa)?;
                vec![Complex64::new(0.0, 0.0)]
            }
            WeKind::GeneralHelicoid { kappa, alpha } => {
                finite("kappa", *kappa)?;
                finite("alpha", *alpha)?;
                vec![Complex64::new(0.0, 0.0)]
            }
            WeKind::GeneralScherk { a, alpha } => {
                if !(*alpha > 0.0 && *alpha < FRAC_PI_2) {
                    return Err(Error::InvalidParameter(format!(
                        "general_scherk requires 0 < alpha < pi/2, got {alpha}"
                    )));
                }
                if !(*a > 0.0 && a.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "general_scherk requires a > 0, got {a}"
                    )));
                }
                // w^2 = -exp(+-2 i alpha)
                let mut roots = Vec::new();
                for s in [1.0, -1.0] {
                    let w = I * Complex64::from_polar(1.0, s * alpha);
                    roots.push(w);
                    roots.push(-w);
                }
                roots
            }
            WeKind::GeneralEnneper { a, b } => {
                finite("a", *a)?;
                finite("b", *b)?;
                vec![Complex64::new(0.0, 0.0)]
            }
            WeKind::Enneper => Vec::new(),
            WeKind::Scherk => vec![ONE, -ONE, I, -I],
            WeKind::Henneberg => vec![Complex64::new(0.0, 0.0)],
            WeKind::SchwarzRiemann => {
                // w^4 = 7 -+ 4 sqrt 3
                let mut roots = Vec::new();
                for q in [7.0 - 4.0 * 3f64.sqrt(), 7.0 + 4.0 * 3f64.sqrt()] {
                    let r = q.powf(0.25);
                    for k in 0..4 {
                        roots.push(Complex64::from_polar(r, k as f64 * FRAC_PI_2));
                    }
                }
                roots
            }
            WeKind::Custom { numerator, denominator } => {
                let all = numerator.iter().chain(denominator);
                if all.clone().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                    return Err(Error::InvalidParameter("custom coefficients must be finite".into()));
                }
                if numerator.is_empty() {
                    return Err(Error::InvalidParameter("custom numerator is empty".into()));
                }
                if denominator.iter().all(|z| z.norm() == 0.0) {
                    return Err(Error::InvalidParameter("custom denominator is identically zero".into()));
                }
                polynomial_roots(denominator)
            }
        };
        Ok(Self {
            kind,
            phase: ONE,
            poles,
        })
    }

    pub fn enneper() -> Self {
        Self::new(WeKind::Enneper).expect("no parameters")
    }

    pub fn catenoid(kappa: f64) -> Result<Self> {
        Self::new(WeKind::Catenoid { kappa })
    }

    pub fn right_helicoid(kappa: f64) -> Result<Self> {
        Self::new(WeKind::RightHelicoid { kappa })
    }

    pub fn general_helicoid(kappa: f64, alpha: f64) -> Result<Self> {
        Self::new(WeKind::GeneralHelicoid { kappa, alpha })
    }

    pub fn scherk() -> Self {
        Self::new(WeKind::Scherk).expect("no parameters")
    }

    pub fn general_scherk(a: f64, alpha: f64) -> Result<Self> {
        Self::new(WeKind::GeneralScherk { a, alpha })
    }

    pub fn henneberg() -> Self {
        Self::new(WeKind::Henneberg).expect("no parameters")
    }

    pub fn general_enneper(a: f64, b: f64) -> Result<Self> {
        Self::new(WeKind::GeneralEnneper { a, b })
    }

    pub fn schwarz_riemann() -> Self {
        Self::new(WeKind::SchwarzRiemann).expect("no parameters")
    }

    pub fn custom(numerator: Vec<Complex64>, denominator: Vec<Complex64>) -> Result<Self> {
        Self::new(WeKind::Custom { numerator, denominator })
    }

    /// Entry `id` with missing parameters filled by the catalog defaults
    /// (`kappa = 1`, `alpha = pi/4`, `a = 1`, `b = 0`).
    pub fn from_params(id: SurfaceId, p: &WeParams) -> Result<Self> {
        let kappa = p.kappa.unwrap_or(1.0);
        let alpha = p.alpha.unwrap_or(std::f64::consts::FRAC_PI_4);
        let a = p.a.unwrap_or(1.0);
        let b = p.b.unwrap_or(0.0);
        match id {
            SurfaceId::Enneper => Ok(Self::enneper()),
            SurfaceId::Catenoid => Self::catenoid(kappa),
            SurfaceId::RightHelicoid => Self::right_helicoid(kappa),
            SurfaceId::GeneralHelicoid => Self::general_helicoid(kappa, alpha),
            SurfaceId::Scherk => Ok(Self::scherk()),
            SurfaceId::GeneralScherk => Self::general_scherk(a, alpha),
            SurfaceId::Henneberg => Ok(Self::henneberg()),
            SurfaceId::GeneralEnneper => Self::general_enneper(a, b),
            SurfaceId::SchwarzRiemann => Ok(Self::schwarz_riemann()),
            SurfaceId::Custom => match (&p.numerator, &p.denominator) {
                (Some(n), Some(d)) => Self::custom(n.clone(), d.clone()),
                _ => Err(Error::InvalidParameter(
                    "custom surfaces need numerator and denominator coefficients".into(),
                )),
            },
        }
    }

    /// Default catalog entry for `id`.
    pub fn default_for(id: SurfaceId) -> Result<Self> {
        Self::from_params(id, &WeParams::default())
    }

    pub fn id(&self) -> SurfaceId {
        match self.kind {
            WeKind::Enneper => SurfaceId::Enneper,
            WeKind::Catenoid { .. } => SurfaceId::Catenoid,
            WeKind::RightHelicoid { .. } => SurfaceId::RightHelicoid,
            WeKind::GeneralHelicoid { .. } => SurfaceId::GeneralHelicoid,
            WeKind::Scherk => SurfaceId::Scherk,
            WeKind::GeneralScherk { .. } => SurfaceId::GeneralScherk,
            WeKind::Henneberg => SurfaceId::Henneberg,
            WeKind::GeneralEnneper { .. } => SurfaceId::GeneralEnneper,
            WeKind::SchwarzRiemann => SurfaceId::SchwarzRiemann,
            WeKind::Custom { .. } => SurfaceId::Custom,
        }
    }

    pub fn kind(&self) -> &WeKind {
        &self.kind
    }

    pub fn phase(&self) -> Complex64 {
        self.phase
    }

    pub fn with_phase(mut self, phase: Complex64) -> Result<Self> {
        if (phase.norm() - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidParameter(format!(
                "conjugation phase must have unit modulus, got |{phase}| = {}",
                phase.norm()
            )));
        }
        self.phase = phase;
        Ok(self)
    }

    /// Harmonic conjugate data: phase multiplied by `-i`.
    pub fn conjugate(&self) -> Self {
        let mut out = self.clone();
        out.phase = Complex64::new(self.phase.im, -self.phase.re);
        out
    }

    /// Every pole and branch point of `R`.
    pub fn all_singularities(&self) -> &[Complex64] {
        &self.poles
    }

    /// Singular points inside the bounding box of `region`'s nodes.
    pub fn singularities(&self, region: &ParamGrid) -> Vec<Complex64> {
        let (lo, hi) = region.bounding_box();
        self.poles
            .iter()
            .copied()
            .filter(|z| z.re >= lo.re && z.re <= hi.re && z.im >= lo.im && z.im <= hi.im)
            .collect()
    }

    fn check_point(&self, w: Complex64) -> Result<()> {
        if !(w.re.is_finite() && w.im.is_finite()) {
            return Err(Error::NonFinite("evaluation point"));
        }
        for p in &self.poles {
            if (w - p).norm() <= 1e-12 * (1.0 + p.norm()) {
                return Err(Error::SingularPoint {
                    id: self.id().as_str(),
                    w,
                });
            }
        }
        Ok(())
    }

    fn checked(&self, w: Complex64, v: Complex64) -> Result<Complex64> {
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::SingularPoint {
                id: self.id().as_str(),
                w,
            })
        }
    }

    /// Catalog formula without phase. The Schwarz-Riemann root is taken
    /// with the given square root of `1 - 14 w^4 + w^8`.
    fn formula(&self, w: Complex64, sr_root: Option<Complex64>) -> Complex64 {
        match &self.kind {
            WeKind::Enneper => ONE,
            WeKind::Catenoid { kappa } => *kappa / (2.0 * w * w),
            WeKind::RightHelicoid { kappa } => I * *kappa / (2.0 * w * w),
            WeKind::GeneralHelicoid { kappa, alpha } => Complex64::from_polar(*kappa, *alpha) / (2.0 * w * w),
            WeKind::Scherk => 2.0 / (1.0 - w.powi(4)),
            WeKind::GeneralScherk { a, alpha } => {
                let c = -2.0 * a * I * (2.0 * alpha).sin();
                c / (1.0 + 2.0 * w * w * (2.0 * alpha).cos() + w.powi(4))
            }
            WeKind::Henneberg => 1.0 - w.powi(-4),
            WeKind::GeneralEnneper { a, b } => I * *a * (w * w - 1.0) / w.powi(3) - I * *b / (2.0 * w * w),
            WeKind::SchwarzRiemann => {
                let root = sr_root.unwrap_or_else(|| sr_poly(w).sqrt());
                root.inv()
            }
            WeKind::Custom { numerator, denominator } => horner(numerator, w) / horner(denominator, w),
        }
    }

    fn formula_derivative(&self, w: Complex64, sr_root: Option<Complex64>) -> Complex64 {
        match &self.kind {
            WeKind::Enneper => Complex64::new(0.0, 0.0),
            WeKind::Catenoid { kappa } => -*kappa / w.powi(3),
            WeKind::RightHelicoid { kappa } => -I * *kappa / w.powi(3),
            WeKind::GeneralHelicoid { kappa, alpha } => -Complex64::from_polar(*kappa, *alpha) / w.powi(3),
            WeKind::Scherk => 8.0 * w.powi(3) / (1.0 - w.powi(4)).powi(2),
            WeKind::GeneralScherk { a, alpha } => {
                let c = -2.0 * a * I * (2.0 * alpha).sin();
                let cos2 = (2.0 * alpha).cos();
                let d = 1.0 + 2.0 * w * w * cos2 + w.powi(4);
                -c * (4.0 * w * cos2 + 4.0 * w.powi(3)) / (d * d)
            }
            WeKind::Henneberg => 4.0 * w.powi(-5),
            WeKind::GeneralEnneper { a, b } => I * *a * (3.0 * w.powi(-4) - w.powi(-2)) + I * *b * w.powi(-3),
            WeKind::SchwarzRiemann => {
                let r = self.formula(w, sr_root);
                let dp = -56.0 * w.powi(3) + 8.0 * w.powi(7);
                -0.5 * r * r * r * dp
            }
            WeKind::Custom { numerator, denominator } => {
                let (p, q) = (horner(numerator, w), horner(denominator, w));
                let (dp, dq) = (horner_derivative(numerator, w), horner_derivative(denominator, w));
                (dp * q - p * dq) / (q * q)
            }
        }
    }

    /// `R(w)`, principal branch for multivalued entries.
    pub fn eval_r(&self, w: Complex64) -> Result<Complex64> {
        self.check_point(w)?;
        self.checked(w, self.phase * self.formula(w, None))
    }

    /// `R'(w)`, principal branch for multivalued entries.
    pub fn eval_dr(&self, w: Complex64) -> Result<Complex64> {
        self.check_point(w)?;
        self.checked(w, self.phase * self.formula_derivative(w, None))
    }

    /// Whether `R` needs branch continuation along paths.
    pub fn is_multivalued(&self) -> bool {
        matches!(self.kind, WeKind::SchwarzRiemann)
    }

    /// Evaluator that continues square-root branches along a sequence of
    /// points, seeded with the principal branch at the first point.
    pub fn continuation(&self) -> RContinuation {
        RContinuation {
            f: self.clone(),
            root: None,
        }
    }

    /// Suggested domain: about 0.63 wide along each native axis so that 64
    /// nodes per axis give spacing near `1e-2`.
    pub fn default_domain(&self) -> DefaultDomain {
        let rect = GridKind::Rectangle {
            r1: (-0.315, 0.315),
            r2: (-0.315, 0.315),
        };
        let origin = Complex64::new(0.0, 0.0);
        match self.kind {
            WeKind::Enneper | WeKind::Scherk | WeKind::GeneralScherk { .. } | WeKind::SchwarzRiemann => DefaultDomain {
                kind: rect,
                base: origin,
            },
            WeKind::Catenoid { .. } | WeKind::RightHelicoid { .. } | WeKind::GeneralHelicoid { .. } => DefaultDomain {
                kind: GridKind::Annulus {
                    rho: (0.4, 0.9),
                    angle: (0.0, 0.63),
                },
                base: ONE,
            },
            WeKind::Henneberg | WeKind::GeneralEnneper { .. } => DefaultDomain {
                kind: GridKind::Annulus {
                    rho: (0.5, 0.9),
                    angle: (0.2, 0.83),
                },
                base: Complex64::from_polar(0.7, 0.5),
            },
            WeKind::Custom { .. } => {
                let base = if self.poles.iter().any(|p| p.norm() < 1e-12) {
                    Complex64::new(0.5, 0.0)
                } else {
                    origin
                };
                DefaultDomain { kind: rect, base }
            }
        }
    }
}

/// Path-continued evaluation of `R`. For entries without branch points it
/// is plain evaluation.
#[derive(Debug, Clone)]
pub struct RContinuation {
    f: WeFunction,
    root: Option<Complex64>,
}

impl RContinuation {
    pub fn reset(&mut self, base: Complex64) {
        self.root = if self.f.is_multivalued() {
            Some(sr_poly(base).sqrt())
        } else {
            None
        };
    }

    fn next_root(&mut self, w: Complex64) -> Option<Complex64> {
        if !self.f.is_multivalued() {
            return None;
        }
        let mut s = sr_poly(w).sqrt();
        if let Some(prev) = self.root {
            if (s - prev).norm() > (s + prev).norm() {
                s = -s;
            }
        }
        self.root = Some(s);
        Some(s)
    }

    /// `(R(w), R'(w))` on the continued branch.
    pub fn eval(&mut self, w: Complex64) -> Result<(Complex64, Complex64)> {
        self.f.check_point(w)?;
        let root = self.next_root(w);
        let r = self.f.checked(w, self.f.phase * self.f.formula(w, root))?;
        let dr = self.f.checked(w, self.f.phase * self.f.formula_derivative(w, root))?;
        Ok((r, dr))
    }
}

impl PathIntegrand for RContinuation {
    type Output = Complex64;

    fn start(&mut self, base: Complex64) {
        self.reset(base);
    }

    /// Returns NaN at singular points so the quadrature reports them.
    fn eval(&mut self, w: Complex64) -> Complex64 {
        RContinuation::eval(self, w)
            .map(|v| v.0)
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }
}

fn sr_poly(w: Complex64) -> Complex64 {
    let w4 = w.powi(4);
    1.0 - 14.0 * w4 + w4 * w4
}

fn horner(c: &[Complex64], w: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * w + a)
}

fn horner_derivative(c: &[Complex64], w: Complex64) -> Complex64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, (k, &a)| acc * w + a * k as f64)
}

/// Roots of `sum c_k w^k` by Durand-Kerner iteration.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|z| z.norm() == 0.0) {
        c.pop();
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|z| z / lead).collect();
    let bound = 1.0 + monic[..n].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powi(k as i32) * bound).collect();
    for _ in 0..1000 {
        let mut change: f64 = 0.0;
        for k in 0..n {
            let num = horner(&monic, roots[k]);
            let den = (0..n)
                .filter(|&m| m != k)
                .fold(ONE, |acc, m| acc * (roots[k] - roots[m]));
            if den.norm() == 0.0 {
                continue;
            }
            let step = num / den;
            roots[k] -= step;
            change = change.max(step.norm());
        }
        if change < 1e-15 * bound {
            break;
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn catalog() -> Vec<WeFunction> {
        SurfaceId::CATALOG
            .iter()
            .map(|&id| WeFunction::default_for(id).unwrap())
            .collect()
    }

    #[test]
    fn catalog_values() {
        assert_eq!(WeFunction::enneper().eval_r(c(0.3, -2.0)).unwrap(), ONE);
        assert_eq!(WeFunction::catenoid(1.0).unwrap().eval_r(ONE).unwrap(), c(0.5, 0.0));
        assert_eq!(WeFunction::scherk().eval_r(c(0.0, 0.0)).unwrap(), c(2.0, 0.0));
        assert!(WeFunction::henneberg().eval_r(I).unwrap().norm() < 1e-15);
    }

    #[test]
    fn conjugation_phase() {
        let e = WeFunction::enneper().conjugate();
        assert_eq!(e.phase(), c(0.0, -1.0));
        assert_eq!(e.conjugate().phase(), c(-1.0, 0.0));
        let h = WeFunction::right_helicoid(1.3).unwrap().conjugate();
        let cat = WeFunction::catenoid(1.3).unwrap();
        let w = c(0.4, 0.7);
        assert!((h.eval_r(w).unwrap() - cat.eval_r(w).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn conjugate_is_exactly_minus_i_times() {
        let w = c(0.21, -0.33);
        for f in catalog() {
            let r = f.eval_r(w).unwrap();
            let rc = f.conjugate().eval_r(w).unwrap();
            assert_eq!(rc, c(0.0, -1.0) * r, "{}", f.id());
        }
    }

    #[test]
    fn phase_must_be_unit() {
        assert!(WeFunction::enneper().with_phase(c(1.1, 0.0)).is_err());
        assert!(WeFunction::enneper()
            .with_phase(Complex64::from_polar(1.0, 0.3))
            .is_ok());
    }

    #[test]
    fn general_scherk_constraints() {
        assert!(WeFunction::general_scherk(1.0, 0.0).is_err());
        assert!(WeFunction::general_scherk(1.0, FRAC_PI_2).is_err());
        assert!(WeFunction::general_scherk(0.0, 0.3).is_err());
        let f = WeFunction::general_scherk(1.0, 0.3).unwrap();
        for p in f.all_singularities() {
            let d = 1.0 + 2.0 * p * p * (0.6f64).cos() + p.powi(4);
            assert!(d.norm() < 1e-14);
        }
    }

    #[test]
    fn singular_points_rejected() {
        assert!(matches!(
            WeFunction::catenoid(1.0).unwrap().eval_r(c(0.0, 0.0)),
            Err(Error::SingularPoint { .. })
        ));
        assert!(WeFunction::scherk().eval_r(I).is_err());
        let sr = WeFunction::schwarz_riemann();
        for &p in sr.all_singularities() {
            assert!(sr_poly(p).norm() < 1e-12);
            assert!(sr.eval_r(p).is_err());
        }
        assert_eq!(sr.all_singularities().len(), 8);
    }

    #[test]
    fn singularities_in_region() {
        let g = ParamGrid::rectangle((-2.0, 2.0), (-2.0, 2.0), 5, 5).unwrap();
        let mut s = WeFunction::scherk().singularities(&g);
        s.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        assert_eq!(s, vec![-ONE, -I, I, ONE]);
        assert!(WeFunction::enneper().singularities(&g).is_empty());
        assert_eq!(WeFunction::catenoid(1.0).unwrap().singularities(&g), vec![c(0.0, 0.0)]);
        let sector = ParamGrid::annular_sector((0.4, 0.9), (0.0, 0.6), 5, 5).unwrap();
        assert!(WeFunction::catenoid(1.0).unwrap().singularities(&sector).is_empty());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let w = c(0.31, 0.22);
        let h = 1e-5;
        for f in catalog().into_iter().chain([WeFunction::custom(
            vec![c(1.0, 0.0), c(0.0, 2.0)],
            vec![c(3.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap()])
        {
            let fd = (f.eval_r(w + h).unwrap() - f.eval_r(w - h).unwrap()) / (2.0 * h);
            let d = f.eval_dr(w).unwrap();
            assert!((fd - d).norm() < 1e-7 * (1.0 + d.norm()), "{}: {fd} vs {d}", f.id());
        }
    }

    type ScalarFn = Box<dyn Fn(Complex64) -> Complex64>;

    #[test]
    fn antiderivatives_differentiate_back_to_r() {
        // closed-form antiderivatives of a few entries
        let cases: Vec<(WeFunction, ScalarFn)> = vec![
            (WeFunction::enneper(), Box::new(|w| w)),
            (WeFunction::catenoid(2.0).unwrap(), Box::new(|w: Complex64| -1.0 / w)),
            (WeFunction::henneberg(), Box::new(|w: Complex64| w + w.powi(-3) / 3.0)),
            (
                WeFunction::general_enneper(1.5, 0.5).unwrap(),
                Box::new(|w: Complex64| I * 1.5 * (w.ln() + 0.5 * w.powi(-2)) + I * 0.25 / w),
            ),
            (WeFunction::scherk(), Box::new(|w: Complex64| w.atanh() + w.atan())),
        ];
        let w = c(0.3, 0.2);
        let h = 1e-6;
        for (f, anti) in cases {
            let fd = (anti(w + h) - anti(w - h)) / (2.0 * h);
            assert!((fd - f.eval_r(w).unwrap()).norm() < 1e-8, "{}", f.id());
        }
    }

    #[test]
    fn continuation_follows_branch_around_loop() {
        let sr = WeFunction::schwarz_riemann();
        let mut ev = sr.continuation();
        // loop enclosing one branch point changes the sign of the root
        let p = sr.all_singularities()[0];
        let start = p + 0.1;
        ev.reset(start);
        let (r0, _) = ev.eval(start).unwrap();
        let mut last = r0;
        for k in 1..=2000 {
            let a = k as f64 / 2000.0 * std::f64::consts::TAU;
            last = ev.eval(p + Complex64::from_polar(0.1, a)).unwrap().0;
        }
        assert!((last + r0).norm() < 1e-9);
        assert_eq!(
            WeFunction::scherk().continuation().eval(c(0.2, 0.0)).unwrap().0,
            c(2.0 / (1.0 - 0.0016), 0.0)
        );
    }

    #[test]
    fn ids_round_trip_and_unknown_ids_list_valid_ones() {
        for id in SurfaceId::ALL {
            assert_eq!(id.as_str().parse::<SurfaceId>().unwrap(), id);
        }
        let e = "torus".parse::<SurfaceId>().unwrap_err().to_string();
        assert!(e.contains("catenoid") && e.contains("schwarz_riemann"));
    }

    #[test]
    fn durand_kerner_roots() {
        // (w - 2)(w + i)(w - 0.5)
        let r = [c(2.0, 0.0), c(0.0, -1.0), c(0.5, 0.0)];
        let coeffs = [
            -r[0] * r[1] * r[2],
            r[0] * r[1] + r[0] * r[2] + r[1] * r[2],
            -(r[0] + r[1] + r[2]),
            ONE,
        ];
        let roots = polynomial_roots(&coeffs);
        for t in r {
            assert!(roots.iter().any(|z| (z - t).norm() < 1e-12));
        }
        assert!(polynomial_roots(&[ONE]).is_empty());
    }

    #[test]
    fn default_domains_avoid_singularities() {
        for f in catalog() {
            let d = f.default_domain();
            let g = d.grid(9).unwrap();
            assert!(f.eval_r(d.base).is_ok());
            assert!(f.singularities(&g).is_empty() || g.is_annulus(), "{}", f.id());
            for r in g.nodes() {
                assert!(f.eval_r(r).is_ok());
            }
        }
    }
}
