//! Command-line driver: configuration resolution and the five commands.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;

use crate::catalog::{SurfaceId, WeFunction, WeParams};
use crate::diff::FdScheme;
use crate::family::{family_fg, verify_soliton_relations, SolitonFamily};
use crate::generator::{cauchy_riemann_report, generate_conjugate_pair, WeData};
use crate::geometry::{action, fundamental_form_with, Signature};
use crate::grid::{Component, ParamGrid, SurfaceGrid};
use crate::hodograph::FgPair;
use crate::io;
use crate::pde::{
    boost, born_infeld_residual, chain_rule_partials_with, graph_surface, minimal_surface_residual,
    wick_equivalence_check, LorentzBoost, PatchOptions,
};
use crate::report::ResidualReport;

pub const OUT_DIR_ENV: &str = "WICKSURF_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "wicksurf-out";
pub const FAMILY_SCHEMA: &str = "wicksurf-family/1";
pub const BOOST_SCHEMA: &str = "wicksurf-boost/1";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("tolerance breach: {0}")]
    Breach(String),
    #[error(transparent)]
    Run(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Breach(_) | CliError::Run(_) => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Obj,
    Table,
}

#[derive(Debug, Parser)]
#[command(
    name = "wicksurf",
    version,
    about = "Minimal surfaces, conjugate pairs and Born-Infeld soliton families"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a surface and its harmonic conjugate.
    Generate(CommonArgs),
    /// Check a soliton family over a θ-sweep.
    FamilyVerify(FamilyArgs),
    /// Minimal-surface, Wick and Cauchy-Riemann residuals of a surface.
    Residuals(CommonArgs),
    /// Boost invariance of the Born-Infeld residual on the Wick-rotated catenoid.
    BoostCheck(BoostArgs),
    /// Write a surface, or a family member with --theta, in the chosen formats.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Catalog surface id.
    #[arg(long)]
    pub surface: Option<String>,
    /// Scale of catenoid and helicoid entries.
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    /// Angle of the generalized helicoid and Scherk entries.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// First parameter of general_scherk and general_enneper.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Second parameter of general_enneper.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Rectangle `r1_min r1_max r2_min r2_max`.
    #[arg(long, num_args = 4, allow_hyphen_values = true, conflicts_with = "annulus")]
    pub rect: Option<Vec<f64>>,
    /// Annulus `rho_min rho_max`; a full turn unless --angle is given.
    #[arg(long, num_args = 2)]
    pub annulus: Option<Vec<f64>>,
    /// Angular range `psi_min psi_max` of an annular sector.
    #[arg(long, num_args = 2, allow_hyphen_values = true)]
    pub angle: Option<Vec<f64>>,
    /// Nodes per grid axis.
    #[arg(long)]
    pub n: Option<usize>,
    /// Integration base point `re im`.
    #[arg(long, num_args = 2, allow_hyphen_values = true)]
    pub base: Option<Vec<f64>>,
    /// Finite-difference accuracy order (even, 2 to 10).
    #[arg(long)]
    pub fd_order: Option<usize>,
    /// Output directory (overrides the environment and the file).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated output formats.
    #[arg(long, value_delimiter = ',')]
    pub formats: Option<Vec<Format>>,
    /// Bound on the minimal-surface residual.
    #[arg(long)]
    pub tol_residual: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct FamilyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated angles; accepts numbers and forms like `pi/2`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_angle)]
    pub thetas: Option<Vec<f64>>,
    /// Rapidity of the boost applied to each family member.
    #[arg(long, allow_hyphen_values = true)]
    pub rapidity: Option<f64>,
    /// Bound on E/G deviation and |F| across the sweep.
    #[arg(long)]
    pub tol_invariance: Option<f64>,
    /// Relative bound on the action spread.
    #[arg(long)]
    pub tol_action: Option<f64>,
    /// Bound on the change of residual statistics under a boost.
    #[arg(long)]
    pub tol_boost: Option<f64>,
    /// Bound on the soliton relation mismatch.
    #[arg(long)]
    pub tol_relations: Option<f64>,
    /// Bound on the Cauchy-Riemann violation of the pair.
    #[arg(long)]
    pub tol_conjugacy: Option<f64>,
    /// Scale the conjugate surface by 1.01 before checking.
    #[arg(long, hide = true)]
    pub corrupt_conjugate: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BoostArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated rapidities to test.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub rapidities: Option<Vec<f64>>,
    /// Bound on the change of residual statistics under a boost.
    #[arg(long)]
    pub tol_boost: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Export the family member at this angle instead of the surface.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_angle)]
    pub theta: Option<f64>,
}

/// A number, `pi`, `k*pi`, `kpi`, optionally divided: `pi/2`, `-3pi/4`.
pub fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("angle '{s}' is not finite"))
        };
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let coeff = num
        .strip_suffix("pi")
        .map(|c| c.trim().trim_end_matches('*').trim())
        .ok_or_else(|| format!("cannot parse angle '{s}'"))?;
    let k = match coeff {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| format!("cannot parse angle '{s}'"))?,
    };
    let d = match den {
        Some(d) => d.parse::<f64>().map_err(|_| format!("cannot parse angle '{s}'"))?,
        None => 1.0,
    };
    if d == 0.0 {
        return Err(format!("angle '{s}' divides by zero"));
    }
    Ok(k * std::f64::consts::PI / d)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum AngleValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SurfaceSection {
    id: Option<String>,
    kappa: Option<f64>,
    alpha: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GridSection {
    rect: Option<[f64; 4]>,
    annulus: Option<[f64; 2]>,
    angle: Option<[f64; 2]>,
    n: Option<usize>,
    base: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FamilySection {
    thetas: Option<Vec<AngleValue>>,
    rapidity: Option<f64>,
    rapidities: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ToleranceSection {
    residual: Option<f64>,
    invariance: Option<f64>,
    action: Option<f64>,
    boost: Option<f64>,
    relations: Option<f64>,
    conjugacy: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OutputSection {
    dir: Option<PathBuf>,
    formats: Option<Vec<Format>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct NumericsSection {
    fd_order: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ConfigFile {
    surface: SurfaceSection,
    grid: GridSection,
    family: FamilySection,
    tolerances: ToleranceSection,
    output: OutputSection,
    numerics: NumericsSection,
}

impl ConfigFile {
    fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub residual: f64,
    pub invariance: f64,
    pub action: f64,
    pub boost: f64,
    pub relations: f64,
    pub conjugacy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-4,
            invariance: 1e-8,
            action: 1e-7,
            boost: 1e-4,
            relations: 1e-8,
            conjugacy: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// The surface's own default domain.
    Default,
    Rect([f64; 4]),
    Annulus {
        rho: [f64; 2],
        angle: Option<[f64; 2]>,
    },
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub surface: SurfaceId,
    pub params: WeParams,
    pub grid: GridSpec,
    pub n: usize,
    pub base: Option<Complex64>,
    pub thetas: Vec<f64>,
    pub rapidity: f64,
    pub rapidities: Vec<f64>,
    pub tolerances: Tolerances,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
    pub fd_order: usize,
    pub corrupt_conjugate: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            surface: SurfaceId::RightHelicoid,
            params: WeParams::default(),
            grid: GridSpec::Default,
            n: 64,
            base: None,
            thetas: vec![0.0, 0.3, 0.7, 1.1, std::f64::consts::FRAC_PI_2],
            rapidity: 0.8,
            rapidities: vec![0.2, 0.8, 1.5],
            tolerances: Tolerances::default(),
            out_dir: PathBuf::from(DEFAULT_OUT_DIR),
            formats: vec![Format::Csv, Format::Obj],
            fd_order: 6,
            corrupt_conjugate: false,
        }
    }
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    /// Merge defaults, the config file, the output-directory environment
    /// variable and flags, in increasing priority.
    pub fn resolve(common: &CommonArgs, env_out: Option<PathBuf>) -> CliResult<Self> {
        let file = match &common.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let mut cfg = RunConfig::default();
        let id = common.surface.clone().or(file.surface.id.clone());
        if let Some(id) = id {
            cfg.surface = id.parse().map_err(|e: crate::Error| CliError::Config(e.to_string()))?;
        }
        cfg.params = WeParams {
            kappa: common.kappa.or(file.surface.kappa),
            alpha: common.alpha.or(file.surface.alpha),
            a: common.a.or(file.surface.a),
            b: common.b.or(file.surface.b),
            ..WeParams::default()
        };
        let rect = common
            .rect
            .as_ref()
            .map(|v| [v[0], v[1], v[2], v[3]])
            .or(if common.annulus.is_some() { None } else { file.grid.rect });
        let annulus = common
            .annulus
            .as_ref()
            .map(|v| [v[0], v[1]])
            .or(if common.rect.is_some() { None } else { file.grid.annulus });
        let angle = common.angle.as_ref().map(|v| [v[0], v[1]]).or(file.grid.angle);
        cfg.grid = match (rect, annulus) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("grid has both a rectangle and an annulus".into()));
            }
            (Some(r), None) => GridSpec::Rect(r),
            (None, Some(rho)) => GridSpec::Annulus { rho, angle },
            (None, None) => GridSpec::Default,
        };
        if let Some(n) = common.n.or(file.grid.n) {
            cfg.n = n;
        }
        cfg.base = common
            .base
            .as_ref()
            .map(|v| Complex64::new(v[0], v[1]))
            .or(file.grid.base.map(|b| Complex64::new(b[0], b[1])));
        if let Some(t) = &file.family.thetas {
            cfg.thetas = t
                .iter()
                .map(|a| match a {
                    AngleValue::Number(v) => Ok(*v),
                    AngleValue::Text(s) => parse_angle(s),
                })
                .collect::<std::result::Result<_, _>>()
                .map_err(CliError::Config)?;
        }
        if let Some(r) = file.family.rapidity {
            cfg.rapidity = r;
        }
        if let Some(r) = &file.family.rapidities {
            cfg.rapidities = r.clone();
        }
        let t = &file.tolerances;
        let tol = &mut cfg.tolerances;
        for (slot, v) in [
            (&mut tol.residual, common.tol_residual.or(t.residual)),
            (&mut tol.invariance, t.invariance),
            (&mut tol.action, t.action),
            (&mut tol.boost, t.boost),
            (&mut tol.relations, t.relations),
            (&mut tol.conjugacy, t.conjugacy),
        ] {
            if let Some(v) = v {
                *slot = v;
            }
        }
        cfg.out_dir = common
            .out
            .clone()
            .or(env_out)
            .or(file.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        if let Some(f) = common.formats.clone().or(file.output.formats.clone()) {
            cfg.formats = f;
        }
        if let Some(o) = common.fd_order.or(file.numerics.fd_order) {
            cfg.fd_order = o;
        }
        Ok(cfg)
    }

    fn apply_family(&mut self, a: &FamilyArgs) {
        if let Some(t) = &a.thetas {
            self.thetas = t.clone();
        }
        if let Some(r) = a.rapidity {
            self.rapidity = r;
        }
        let tol = &mut self.tolerances;
        for (slot, v) in [
            (&mut tol.invariance, a.tol_invariance),
            (&mut tol.action, a.tol_action),
            (&mut tol.boost, a.tol_boost),
            (&mut tol.relations, a.tol_relations),
            (&mut tol.conjugacy, a.tol_conjugacy),
        ] {
            if let Some(v) = v {
                *slot = v;
            }
        }
        self.corrupt_conjugate = a.corrupt_conjugate;
    }

    /// Check invariants that do not depend on the command.
    pub fn validate(&self) -> CliResult<()> {
        let t = &self.tolerances;
        for (name, v) in [
            ("residual tolerance", t.residual),
            ("invariance tolerance", t.invariance),
            ("action tolerance", t.action),
            ("boost tolerance", t.boost),
            ("relations tolerance", t.relations),
            ("conjugacy tolerance", t.conjugacy),
        ] {
            positive(name, v)?;
        }
        if self.n < 5 {
            return Err(CliError::Config(format!("n must be at least 5, got {}", self.n)));
        }
        if self.formats.is_empty() {
            return Err(CliError::Config("no export formats selected".into()));
        }
        FdScheme::new(self.fd_order).map_err(|e| CliError::Config(e.to_string()))?;
        if !self.rapidity.is_finite() || self.rapidities.iter().any(|r| !r.is_finite()) {
            return Err(CliError::Config("rapidities must be finite".into()));
        }
        Ok(())
    }

    pub fn function(&self) -> CliResult<WeFunction> {
        WeFunction::from_params(self.surface, &self.params).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn param_grid(&self, f: &WeFunction) -> CliResult<ParamGrid> {
        let n = self.n;
        let g = match &self.grid {
            GridSpec::Default => f.default_domain().grid(n),
            GridSpec::Rect([a, b, c, d]) => ParamGrid::rectangle((*a, *b), (*c, *d), n, n),
            GridSpec::Annulus { rho, angle: None } => ParamGrid::annulus(rho[0], rho[1], n, n),
            GridSpec::Annulus { rho, angle: Some(ang) } => {
                ParamGrid::annular_sector((rho[0], rho[1]), (ang[0], ang[1]), n, n)
            }
        };
        g.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn we_data(&self, f: &WeFunction) -> CliResult<WeData> {
        let base = self.base.unwrap_or(f.default_domain().base);
        WeData::new(f.clone(), base).map_err(|e| CliError::Config(e.to_string()))
    }

    fn scheme(&self) -> FdScheme {
        FdScheme::new(self.fd_order).expect("validated")
    }

    fn patch_options(&self) -> PatchOptions {
        PatchOptions {
            scheme: self.scheme(),
            ..PatchOptions::default()
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// Write `s` under `stem` in every configured format.
    fn export(&self, s: &SurfaceGrid, stem: &str, files: &mut Vec<PathBuf>) -> CliResult<()> {
        for f in &self.formats {
            let p = match f {
                Format::Csv => {
                    let p = self.path(&format!("{stem}.csv"));
                    io::write_surface_csv(s, &p)?;
                    p
                }
                Format::Obj => {
                    let p = self.path(&format!("{stem}.obj"));
                    io::write_obj(s, &p)?;
                    p
                }
                Format::Table => {
                    let p = self.path(&format!("{stem}.dat"));
                    io::write_table(s, &p)?;
                    p
                }
            };
            files.push(p);
        }
        Ok(())
    }
}

/// Files written and a one-line summary per check.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

/// Largest Laplacian over the three components at nodes where the
/// centered stencil fits; boundary-band nodes are counted as dropped.
fn harmonicity(s: &SurfaceGrid, scheme: &FdScheme) -> CliResult<ResidualReport> {
    let grid = s.grid();
    let (n1, n2) = grid.shape();
    let band = scheme.accuracy() / 2;
    let inside = |i: usize, j: usize| i >= band && i + band < n1 && j >= band && j + band < n2;
    let mut rep: Option<ResidualReport> = None;
    for c in Component::ALL {
        let lap = scheme.laplacian(grid, s.component(c))?;
        let samples = lap
            .indexed_iter()
            .filter(|((i, j), _)| inside(*i, *j))
            .map(|(n, z)| (n, z.norm(), 1.0))
            .collect::<Vec<_>>();
        let r = ResidualReport::from_samples(samples)
            .with_dropped(n1 * n2 - (n1 - 2 * band.min(n1 / 2)) * (n2 - 2 * band.min(n2 / 2)));
        rep = Some(match rep {
            Some(p) => p.merge(&r),
            None => r,
        });
    }
    Ok(rep.expect("three components"))
}

pub fn cmd_generate(cfg: &RunConfig) -> CliResult<Outcome> {
    cfg.validate()?;
    let f = cfg.function()?;
    let grid = cfg.param_grid(&f)?;
    let data = cfg.we_data(&f)?;
    let (x, y) = generate_conjugate_pair(&data, &grid)?;
    let scheme = cfg.scheme();
    let mut out = Outcome::default();
    let id = cfg.surface.as_str();
    cfg.export(&x, id, &mut out.files)?;
    cfg.export(&y, &format!("{id}_conjugate"), &mut out.files)?;
    let reports = [
        ("laplacian", harmonicity(&x, &scheme)?),
        ("laplacian_conjugate", harmonicity(&y, &scheme)?),
        ("cauchy_riemann", cauchy_riemann_report(&x, &y, &scheme)?),
    ];
    let p = cfg.path(&format!("{id}_harmonicity.csv"));
    io::write_reports(&p, &reports)?;
    out.files.push(p);
    out.summary = reports
        .iter()
        .map(|(n, r)| format!("{n}: max {:e}", r.max_abs))
        .collect();
    Ok(out)
}

pub fn cmd_residuals(cfg: &RunConfig) -> CliResult<Outcome> {
    cfg.validate()?;
    let f = cfg.function()?;
    let grid = cfg.param_grid(&f)?;
    let data = cfg.we_data(&f)?;
    let (x, y) = generate_conjugate_pair(&data, &grid)?;
    let scheme = cfg.scheme();
    let patch = chain_rule_partials_with(&x, &cfg.patch_options())?;
    let form = fundamental_form_with(&x, Signature::Euclidean, &scheme)?;
    let (eg, fm) = form.isothermality();
    let minimal = minimal_surface_residual(&patch);
    let reports = [
        ("minimal_surface", minimal),
        ("wick_equivalence", wick_equivalence_check(&patch)),
        ("cauchy_riemann", cauchy_riemann_report(&x, &y, &scheme)?),
        ("isothermal_e_minus_g", eg),
        ("isothermal_f", fm),
    ];
    let p = cfg.path(&format!("{}_residuals.csv", cfg.surface.as_str()));
    io::write_reports(&p, &reports)?;
    let summary = reports
        .iter()
        .map(|(n, r)| format!("{n}: max {:e} ({} dropped)", r.max_abs, r.dropped))
        .collect();
    if !(minimal.max_abs <= cfg.tolerances.residual) {
        return Err(CliError::Breach(format!(
            "minimal_surface residual {:e} exceeds {:e}",
            minimal.max_abs, cfg.tolerances.residual
        )));
    }
    Ok(Outcome {
        files: vec![p],
        summary,
    })
}

/// One row of the family report.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyRow {
    pub theta: f64,
    pub born_infeld: ResidualReport,
    pub e_deviation: f64,
    pub g_deviation: f64,
    pub f_max: f64,
    pub action: f64,
    pub action_change: f64,
    pub boost_delta: f64,
    pub relations: f64,
    pub breaches: Vec<&'static str>,
}

pub const FAMILY_HEADER: [&str; 12] = [
    "theta",
    "bi_max_abs",
    "bi_max_scaled",
    "bi_dropped",
    "e_deviation",
    "g_deviation",
    "f_max",
    "action",
    "action_rel_change",
    "boost_delta",
    "relations_mismatch",
    "status",
];

impl FamilyRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.theta.to_string(),
            format!("{:e}", self.born_infeld.max_abs),
            format!("{:e}", self.born_infeld.max_scaled),
            self.born_infeld.dropped.to_string(),
            format!("{:e}", self.e_deviation),
            format!("{:e}", self.g_deviation),
            format!("{:e}", self.f_max),
            self.action.to_string(),
            format!("{:e}", self.action_change),
            format!("{:e}", self.boost_delta),
            format!("{:e}", self.relations),
            if self.breaches.is_empty() {
                "ok".to_string()
            } else {
                format!("fail:{}", self.breaches.join("+"))
            },
        ]
    }
}

struct FamilySetup {
    data: WeData,
    grid: ParamGrid,
    family: SolitonFamily,
}

fn family_setup(cfg: &RunConfig) -> CliResult<FamilySetup> {
    cfg.validate()?;
    if cfg.thetas.is_empty() {
        return Err(CliError::Config("theta list is empty".into()));
    }
    if cfg.thetas.iter().any(|t| !t.is_finite()) {
        return Err(CliError::Config("thetas must be finite".into()));
    }
    let f = cfg.function()?;
    let grid = cfg.param_grid(&f)?;
    let data = cfg.we_data(&f)?;
    let (x, mut y) = generate_conjugate_pair(&data, &grid)?;
    if cfg.corrupt_conjugate {
        y = y.scaled(1.01);
    }
    let family = SolitonFamily::new_unchecked(x, y)?;
    Ok(FamilySetup { data, grid, family })
}

/// Conjugacy report and per-θ rows of the family check, without writing
/// files.
pub fn family_rows(cfg: &RunConfig) -> CliResult<(ResidualReport, Vec<FamilyRow>)> {
    let setup = family_setup(cfg)?;
    Ok((*setup.family.conjugacy(), rows_for(cfg, &setup)?))
}

fn rows_for(cfg: &RunConfig, setup: &FamilySetup) -> CliResult<Vec<FamilyRow>> {
    let FamilySetup {
        data,
        grid,
        family: fam,
    } = setup;
    let scheme = cfg.scheme();
    let p1 = FgPair::from_we(data)?;
    let p2 = FgPair::from_we(&data.conjugate())?;
    let lorentz = LorentzBoost::new(cfg.rapidity)?;
    let tol = cfg.tolerances;
    let mut baseline = None;
    let mut first_action = None;
    let mut rows = Vec::with_capacity(cfg.thetas.len());
    for &theta in &cfg.thetas {
        let s = fam.family_at(theta);
        let patch = chain_rule_partials_with(&s, &cfg.patch_options())?;
        let bi = born_infeld_residual(&patch);
        let boosted = born_infeld_residual(&boost(&patch, &lorentz));
        let form = fundamental_form_with(&s, Signature::WickSigned, &scheme)?;
        let base_form = baseline.get_or_insert_with(|| form.clone());
        let e_dev = ResidualReport::from_difference(&form.e, &base_form.e).max_abs;
        let g_dev = ResidualReport::from_difference(&form.g, &base_form.g).max_abs;
        let f_max = ResidualReport::from_array(&form.f).max_abs;
        let a = action(&form, grid)?;
        let a0 = *first_action.get_or_insert(a);
        let action_change = (a - a0).abs() / a0.abs().max(f64::MIN_POSITIVE);
        let relations = verify_soliton_relations(&s, &family_fg(&p1, &p2, theta), data.base)?.max_abs();
        let boost_delta = (boosted.max_abs - bi.max_abs)
            .abs()
            .max((boosted.mean_abs - bi.mean_abs).abs());
        let mut breaches = Vec::new();
        for (name, value, limit) in [
            ("born_infeld", bi.max_abs, tol.residual),
            ("e_deviation", e_dev, tol.invariance),
            ("g_deviation", g_dev, tol.invariance),
            ("f_max", f_max, tol.invariance),
            ("action", action_change, tol.action),
            ("boost", boost_delta, tol.boost),
            ("relations", relations, tol.relations),
        ] {
            if !(value <= limit) {
                breaches.push(name);
            }
        }
        rows.push(FamilyRow {
            theta,
            born_infeld: bi,
            e_deviation: e_dev,
            g_deviation: g_dev,
            f_max,
            action: a,
            action_change,
            boost_delta,
            relations,
            breaches,
        });
    }
    Ok(rows)
}

pub fn cmd_family_verify(cfg: &RunConfig) -> CliResult<Outcome> {
    let setup = family_setup(cfg)?;
    let conjugacy = *setup.family.conjugacy();
    let rows = rows_for(cfg, &setup)?;
    let mut out = Outcome::default();
    let p = cfg.path("family_verify.csv");
    io::write_csv(&p, FAMILY_SCHEMA, &FAMILY_HEADER, rows.iter().map(FamilyRow::record))?;
    out.files.push(p);
    let p = cfg.path("family_conjugacy.csv");
    io::write_reports(&p, &[("cauchy_riemann", conjugacy)])?;
    out.files.push(p);
    for (k, &theta) in cfg.thetas.iter().enumerate() {
        cfg.export(
            &setup.family.family_at(theta),
            &format!("family_theta{k}"),
            &mut out.files,
        )?;
    }
    out.summary.push(format!("cauchy_riemann: max {:e}", conjugacy.max_abs));
    for r in &rows {
        out.summary.push(format!(
            "theta {}: born_infeld {:e}, E dev {:e}, |F| {:e}, action {}, boost delta {:e}, relations {:e} [{}]",
            r.theta,
            r.born_infeld.max_abs,
            r.e_deviation.max(r.g_deviation),
            r.f_max,
            r.action,
            r.boost_delta,
            r.relations,
            if r.breaches.is_empty() {
                "ok".to_string()
            } else {
                r.breaches.join(", ")
            }
        ));
    }
    let mut failures = Vec::new();
    if !(conjugacy.max_abs <= cfg.tolerances.conjugacy) {
        failures.push(format!(
            "conjugate pair: Cauchy-Riemann violation {:e} exceeds {:e}",
            conjugacy.max_abs, cfg.tolerances.conjugacy
        ));
    }
    for (k, r) in rows.iter().enumerate() {
        if !r.breaches.is_empty() {
            failures.push(format!("row {k} (theta {}): {}", r.theta, r.breaches.join(", ")));
        }
    }
    if failures.is_empty() {
        Ok(out)
    } else {
        for line in &out.summary {
            eprintln!("{line}");
        }
        Err(CliError::Breach(failures.join("; ")))
    }
}

/// Born-Infeld solution `arccosh sqrt(x^2 - t^2)` on `x^2 - t^2 > 1`.
pub fn wick_catenoid(x: f64, t: f64) -> f64 {
    (x * x - t * t).sqrt().acosh()
}

pub const BOOST_HEADER: [&str; 6] = [
    "rapidity",
    "bi_max_before",
    "bi_max_after",
    "bi_mean_delta",
    "max_delta",
    "composition_error",
];

pub fn cmd_boost_check(cfg: &RunConfig) -> CliResult<Outcome> {
    cfg.validate()?;
    let rect = match &cfg.grid {
        GridSpec::Rect(r) => *r,
        GridSpec::Default => [1.5, 2.5, -0.5, 0.5],
        GridSpec::Annulus { .. } => {
            return Err(CliError::Config("boost-check needs a rectangle in (x, t)".into()));
        }
    };
    let grid = ParamGrid::rectangle((rect[0], rect[1]), (rect[2], rect[3]), cfg.n, cfg.n)
        .map_err(|e| CliError::Config(e.to_string()))?;
    if ndarray::indices(grid.shape()).into_iter().any(|(i, j)| {
        let r = grid.node(i, j);
        r.re * r.re - r.im * r.im <= 1.0
    }) {
        return Err(CliError::Config(
            "boost-check rectangle must satisfy x^2 - t^2 > 1".into(),
        ));
    }
    let s = graph_surface(&grid, wick_catenoid)?;
    let patch = chain_rule_partials_with(&s, &cfg.patch_options())?;
    let before = born_infeld_residual(&patch);
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut summary = vec![format!("unboosted: max {:e}", before.max_abs)];
    for &r in &cfg.rapidities {
        let lb = LorentzBoost::new(r)?;
        let after = born_infeld_residual(&boost(&patch, &lb));
        let mean_delta = (after.mean_abs - before.mean_abs).abs();
        let delta = (after.max_abs - before.max_abs).abs().max(mean_delta);
        let half = LorentzBoost::new(0.5 * r)?;
        let composition = patch
            .x
            .iter()
            .zip(&patch.t)
            .map(|(&x, &t)| {
                let (x2, t2) = half.apply(x, t);
                let (x2, t2) = half.apply(x2, t2);
                let (x1, t1) = lb.apply(x, t);
                (x2 - x1).norm().max((t2 - t1).norm())
            })
            .fold(0.0, f64::max);
        rows.push(vec![
            r.to_string(),
            format!("{:e}", before.max_abs),
            format!("{:e}", after.max_abs),
            format!("{:e}", mean_delta),
            format!("{:e}", delta),
            format!("{:e}", composition),
        ]);
        summary.push(format!(
            "rapidity {r}: max {:e}, delta {:e}, composition {:e}",
            after.max_abs, delta, composition
        ));
        if !(delta <= cfg.tolerances.boost) {
            failures.push(format!(
                "rapidity {r}: delta {delta:e} exceeds {:e}",
                cfg.tolerances.boost
            ));
        }
        if !(composition <= 1e-12 * (1.0 + lb.a() * lb.a())) {
            failures.push(format!("rapidity {r}: composition error {composition:e}"));
        }
    }
    let p = cfg.path("boost_check.csv");
    io::write_csv(&p, BOOST_SCHEMA, &BOOST_HEADER, rows)?;
    if failures.is_empty() {
        Ok(Outcome {
            files: vec![p],
            summary,
        })
    } else {
        Err(CliError::Breach(failures.join("; ")))
    }
}

pub fn cmd_export(cfg: &RunConfig, theta: Option<f64>) -> CliResult<Outcome> {
    cfg.validate()?;
    let f = cfg.function()?;
    let grid = cfg.param_grid(&f)?;
    let data = cfg.we_data(&f)?;
    let mut out = Outcome::default();
    let id = cfg.surface.as_str();
    match theta {
        None => {
            let x = crate::generator::generate(&data, &grid)?;
            cfg.export(&x, id, &mut out.files)?;
        }
        Some(theta) => {
            if !theta.is_finite() {
                return Err(CliError::Config("theta must be finite".into()));
            }
            let (x, y) = generate_conjugate_pair(&data, &grid)?;
            let fam = SolitonFamily::with_tolerance(x, y, cfg.tolerances.conjugacy)?;
            cfg.export(&fam.family_at(theta), &format!("{id}_family"), &mut out.files)?;
        }
    }
    Ok(out)
}

/// Parse `args`, run the command and report; returns the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let env_out = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    let result = match &cli.command {
        Command::Generate(c) => RunConfig::resolve(c, env_out).and_then(|cfg| cmd_generate(&cfg)),
        Command::Residuals(c) => RunConfig::resolve(c, env_out).and_then(|cfg| cmd_residuals(&cfg)),
        Command::FamilyVerify(a) => RunConfig::resolve(&a.common, env_out).and_then(|mut cfg| {
            cfg.apply_family(a);
            cmd_family_verify(&cfg)
        }),
        Command::BoostCheck(a) => RunConfig::resolve(&a.common, env_out).and_then(|mut cfg| {
            if let Some(r) = &a.rapidities {
                cfg.rapidities = r.clone();
            }
            if let Some(t) = a.tol_boost {
                cfg.tolerances.boost = t;
            }
            cmd_boost_check(&cfg)
        }),
        Command::Export(a) => RunConfig::resolve(&a.common, env_out).and_then(|cfg| cmd_export(&cfg, a.theta)),
    };
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            for line in &out.summary {
                let _ = writeln!(stdout, "{line}");
            }
            for f in &out.files {
                let _ = writeln!(stdout, "wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
