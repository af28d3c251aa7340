//! TOML run configuration.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cli::expr::{parse_expression, Expr, Var};
use crate::error::{Error, Result};
use crate::exhaustion::{build_ladder_with, ExhaustionPlan};
use crate::flow::grid::Grid;
use crate::flow::stepper::{BoundaryData, InitialData, StepControl};
use crate::geometry::{make_model, ModelGeometry};
use crate::profile::{ProfileSpec, TableProfile};

pub const CHECKS: [&str; 9] = [
    "hemisphere",
    "cmc",
    "supersolution",
    "operator",
    "height",
    "comparison",
    "sff",
    "identities",
    "constants",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Euclidean,
    Hyperbolic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub n: usize,
    pub kappa: f64,
    /// `"one"`, `"cosh"` or a CSV table path. Defaults to `"one"` for the
    /// euclidean model and `"cosh"` for the hyperbolic one.
    pub rho: Option<String>,
    pub xi_table: Option<PathBuf>,
    pub iota_table: Option<PathBuf>,
    pub quad_tol: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            kind: ModelKind::Euclidean,
            n: 2,
            kappa: 1.0,
            rho: None,
            xi_table: None,
            iota_table: None,
            quad_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub nr: usize,
    pub ntheta: usize,
    #[serde(rename = "R")]
    pub radius: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            nr: 64,
            ntheta: 32,
            radius: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    /// Boundary data in `theta`.
    pub phi: String,
    /// Initial data in `r, theta`; the radial extension of `phi` if absent.
    pub u0: Option<String>,
    #[serde(rename = "T")]
    pub t_final: Option<f64>,
    pub snapshot_every: usize,
}

impl Default for ProblemSection {
    fn default() -> Self {
        ProblemSection {
            phi: "0".into(),
            u0: None,
            t_final: None,
            snapshot_every: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub checks: Vec<String>,
    pub tol: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            checks: CHECKS.iter().map(|s| s.to_string()).collect(),
            tol: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExhaustSection {
    pub r0: f64,
    pub rungs: usize,
    pub growth: f64,
    pub tol: f64,
    pub h: f64,
    pub ntheta: usize,
    pub dt_max: f64,
    pub snapshots: usize,
    pub parallel: bool,
    pub early_stop: bool,
}

impl Default for ExhaustSection {
    fn default() -> Self {
        ExhaustSection {
            r0: 1.0,
            rungs: 4,
            growth: 2.0,
            tol: 1e-3,
            h: 0.125,
            ntheta: 32,
            dt_max: 1.0 / 64.0,
            snapshots: 16,
            parallel: false,
            early_stop: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    pub control: StepControl,
    pub problem: ProblemSection,
    pub verify: VerifySection,
    pub exhaust: ExhaustSection,
    /// Directory relative paths resolve against; not serialized.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn schema(key: &str, constraint: String) -> Error {
    Error::Schema {
        key: key.into(),
        constraint,
    }
}

fn require(ok: bool, key: &str, constraint: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(schema(key, constraint()))
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(cfg)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let key = e.span().map(|s| format!("byte {}", s.start)).unwrap_or_else(|| "<config>".into());
        schema(&key, e.message().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        require(m.n >= 2, "model.n", || format!("must be >= 2, got {}", m.n))?;
        require(m.kappa > 0.0 && m.kappa.is_finite(), "model.kappa", || {
            format!("must be positive, got {}", m.kappa)
        })?;
        require(m.quad_tol > 0.0 && m.quad_tol <= 1e-3, "model.quad_tol", || {
            format!("must lie in (0, 1e-3], got {}", m.quad_tol)
        })?;
        if let Some(rho) = &m.rho {
            require(rho == "one" || rho == "cosh" || rho.ends_with(".csv"), "model.rho", || {
                format!("must be \"one\", \"cosh\" or a .csv path, got {rho:?}")
            })?;
        }
        let g = &self.grid;
        require(g.nr >= 8, "grid.nr", || format!("must be >= 8, got {}", g.nr))?;
        require(g.ntheta == 1 || g.ntheta >= 8, "grid.ntheta", || {
            format!("must be >= 8 or = 1, got {}", g.ntheta)
        })?;
        require(g.ntheta == 1 || m.n == 2, "grid.ntheta", || {
            format!("must be 1 (radial) when n = {}", m.n)
        })?;
        require(g.radius > 0.0 && g.radius.is_finite(), "grid.R", || {
            format!("must be positive, got {}", g.radius)
        })?;
        self.control.validate().map_err(|e| match e {
            Error::Schema { key, constraint } => schema(&format!("control.{key}"), constraint),
            e => e,
        })?;
        let p = &self.problem;
        self.phi().map_err(|e| schema("problem.phi", e.to_string()))?;
        self.u0_expr().map_err(|e| schema("problem.u0", e.to_string()))?;
        if let Some(t) = p.t_final {
            require(t > 0.0 && t.is_finite(), "problem.T", || format!("must be positive, got {t}"))?;
        }
        require(p.snapshot_every >= 1, "problem.snapshot_every", || "must be >= 1".into())?;
        let v = &self.verify;
        require(v.tol > 0.0, "verify.tol", || format!("must be positive, got {}", v.tol))?;
        for c in &v.checks {
            require(CHECKS.contains(&c.as_str()), "verify.checks", || {
                format!("unknown check {c:?}; known: {}", CHECKS.join(", "))
            })?;
        }
        let x = &self.exhaust;
        require(x.r0 > 0.0, "exhaust.r0", || format!("must be positive, got {}", x.r0))?;
        require(x.rungs >= 2, "exhaust.rungs", || format!("must be >= 2, got {}", x.rungs))?;
        require(x.growth > 1.0, "exhaust.growth", || format!("must exceed 1, got {}", x.growth))?;
        require(x.tol > 0.0, "exhaust.tol", || format!("must be positive, got {}", x.tol))?;
        require(x.h > 0.0, "exhaust.h", || format!("must be positive, got {}", x.h))?;
        require(x.ntheta >= 8, "exhaust.ntheta", || format!("must be >= 8, got {}", x.ntheta))?;
        require(x.dt_max > 0.0, "exhaust.dt_max", || format!("must be positive, got {}", x.dt_max))?;
        require(x.snapshots >= 1, "exhaust.snapshots", || "must be >= 1".into())?;
        Ok(())
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn table(&self, p: &Path) -> Result<ProfileSpec> {
        Ok(ProfileSpec::Table(TableProfile::from_csv_path(self.resolve(p))?))
    }

    pub fn model(&self) -> Result<ModelGeometry> {
        let m = &self.model;
        let base = match m.kind {
            ModelKind::Euclidean => ProfileSpec::Euclidean,
            ModelKind::Hyperbolic => ProfileSpec::hyperbolic(m.kappa),
        };
        let xi = match &m.xi_table {
            Some(p) => self.table(p)?,
            None => base.clone(),
        };
        let iota = match &m.iota_table {
            Some(p) => self.table(p)?,
            None => base,
        };
        let rho = match (m.rho.as_deref(), m.kind) {
            (Some("one"), _) | (None, ModelKind::Euclidean) => ProfileSpec::constant(1.0),
            (Some("cosh"), _) | (None, ModelKind::Hyperbolic) => ProfileSpec::cosh(m.kappa),
            (Some(path), _) => self.table(Path::new(path))?,
        };
        make_model(xi, iota, rho, m.n, m.quad_tol)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.radius, self.grid.nr, self.grid.ntheta)
    }

    pub fn phi(&self) -> Result<Expr> {
        let e = parse_expression(&self.problem.phi)?;
        if e.uses(Var::R) || e.uses(Var::T) {
            return Err(Error::Parameter("phi may only depend on theta".into()));
        }
        Ok(e)
    }

    pub fn u0_expr(&self) -> Result<Option<Expr>> {
        match &self.problem.u0 {
            None => Ok(None),
            Some(src) => {
                let e = parse_expression(src)?;
                if e.uses(Var::T) {
                    return Err(Error::Parameter("u0 may not depend on t".into()));
                }
                Ok(Some(e))
            }
        }
    }

    /// Boundary and initial data as closures. Evaluation errors become NaN,
    /// which the problem constructor rejects.
    pub fn data(&self) -> Result<(BoundaryData, InitialData)> {
        let phi = Arc::new(self.phi()?);
        let boundary: BoundaryData = {
            let phi = phi.clone();
            Arc::new(move |theta| phi.eval(0.0, theta, 0.0).unwrap_or(f64::NAN))
        };
        let initial: InitialData = match self.u0_expr()? {
            Some(e) => Arc::new(move |r, theta| e.eval(r, theta, 0.0).unwrap_or(f64::NAN)),
            None => Arc::new(move |_, theta| phi.eval(0.0, theta, 0.0).unwrap_or(f64::NAN)),
        };
        Ok((boundary, initial))
    }

    pub fn exhaustion_plan(&self, model: &ModelGeometry) -> Result<ExhaustionPlan> {
        let x = &self.exhaust;
        let mut plan = build_ladder_with(model, x.r0, x.rungs, x.growth)?;
        plan.tol = x.tol;
        plan.h = x.h;
        plan.ntheta = x.ntheta;
        plan.control = self.control;
        plan.control.dt_max = x.dt_max;
        plan.snapshots = x.snapshots;
        plan.parallel = x.parallel;
        plan.early_stop = x.early_stop;
        plan.check(model)?;
        Ok(plan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config("[model]\nkind = \"euclidean\"\nn = 2\n").unwrap();
        assert_eq!(cfg.model.quad_tol, 1e-10);
        assert_eq!(cfg.control.cfl, 0.5);
        assert_eq!(cfg.grid, GridSection::default());
        let model = cfg.model().unwrap();
        assert_eq!(model.rho, ProfileSpec::constant(1.0));
    }

    #[test]
    fn ntheta_guard() {
        let err = parse_config("[grid]\nntheta = 3\n").unwrap_err();
        match err {
            Error::Schema { key, constraint } => {
                assert_eq!(key, "grid.ntheta");
                assert!(constraint.contains(">= 8 or = 1"), "{constraint}");
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn schema_errors_name_the_key() {
        for (text, key) in [
            ("[control]\ncfl = 2.0\n", "control.cfl"),
            ("[problem]\nphi = \"cos(theta\"\n", "problem.phi"),
            ("[problem]\nphi = \"r\"\n", "problem.phi"),
            ("[verify]\nchecks = [\"nope\"]\n", "verify.checks"),
            ("[model]\nn = 3\n", "grid.ntheta"),
        ] {
            match parse_config(text) {
                Err(Error::Schema { key: k, .. }) => assert_eq!(k, key, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(parse_config("[model]\nbogus = 1\n"), Err(Error::Schema { .. })));
    }

    #[test]
    fn round_trip() {
        let text = "[model]\nkind = \"hyperbolic\"\nkappa = 0.5\n[problem]\nphi = \"0.5*cos(theta)\"\nT = 0.25\n[control]\nscheme = \"explicit-euler\"\n";
        let cfg = parse_config(text).unwrap();
        let again = parse_config(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(again.control.scheme, crate::flow::stepper::Scheme::ExplicitEuler);
    }

    #[test]
    fn data_closures() {
        let cfg = parse_config("[problem]\nphi = \"cos(theta)\"\n").unwrap();
        let (phi, u0) = cfg.data().unwrap();
        assert_eq!(phi(0.0), 1.0);
        assert_eq!(u0(0.7, 0.0), 1.0);
    }
}
