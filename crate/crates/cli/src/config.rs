//! Experiment configuration: a TOML file, validated in full before any compute.

use std::ops::Range;
use std::path::{Path, PathBuf};

use orlicz_lab::orlicz::{make_family, LogGridSpec, DEFAULT_QUADRATURE_ORDER};
use orlicz_lab::verify::{BallPair, Expectation, Fixture, UnitSpeed};
use orlicz_lab::{FamilySpec, Grid2D, OrliczFunction, Profile, SolverConfig};
use serde::Deserialize;
use thiserror::Error;

use crate::expr::Expr;

#[derive(Debug, Error, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub msg: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "config error at line {l}: {}", self.msg),
            None => write!(f, "config error: {}", self.msg),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    Power {
        p: f64,
    },
    PowerLog {
        p: f64,
        alpha: f64,
        c: f64,
    },
    SumPowers {
        p: f64,
        q: f64,
        a: f64,
    },
    Quadratic {},
    DerivedSqrt {
        base: Box<FamilyConfig>,
    },
    /// `ψ(t) = t`, the borderline profile outside every growth class.
    UnitSpeed {},
}

impl FamilyConfig {
    fn to_spec(&self) -> Option<FamilySpec> {
        Some(match self {
            FamilyConfig::Power { p } => FamilySpec::Power { p: *p },
            FamilyConfig::PowerLog { p, alpha, c } => FamilySpec::PowerLog {
                p: *p,
                alpha: *alpha,
                c: *c,
            },
            FamilyConfig::SumPowers { p, q, a } => FamilySpec::SumPowers { p: *p, q: *q, a: *a },
            FamilyConfig::Quadratic {} => FamilySpec::Quadratic,
            FamilyConfig::DerivedSqrt { base } => FamilySpec::DerivedSqrt {
                base: Box::new(base.to_spec()?),
            },
            FamilyConfig::UnitSpeed {} => return None,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    phi: FamilyConfig,
    #[serde(default)]
    psi: Vec<FamilyConfig>,
    problem: Option<RawProblem>,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    check: RawCheck,
    verify: Option<RawVerify>,
    probe: Option<RawProbe>,
    plotdata: Option<RawPlot>,
}

fn default_range() -> [f64; 2] {
    [-1.0, 1.0]
}

fn default_zero() -> String {
    "0".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    n: usize,
    ny: Option<usize>,
    #[serde(default = "default_range")]
    x_range: [f64; 2],
    y0: Option<f64>,
    epsilon: f64,
    #[serde(default = "default_zero")]
    f: String,
    g: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    residual_tol: Option<f64>,
    max_newton_iters: Option<usize>,
    armijo: Option<f64>,
    epsilon_schedule: Option<Vec<f64>>,
    fallback_gd_iters: Option<usize>,
    cg_rel_tol: Option<f64>,
    cg_max_iters: Option<usize>,
    diagnostics: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCheck {
    dimension: Option<usize>,
    t_min: Option<f64>,
    t_max: Option<f64>,
    samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBall {
    center: [f64; 2],
    r: f64,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum RawExpectation {
    #[default]
    Bounded,
    Divergent,
    LhsConverges,
    LhsDiverges,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerify {
    levels: Vec<usize>,
    #[serde(default)]
    balls: Vec<RawBall>,
    #[serde(default)]
    random_balls: usize,
    #[serde(default)]
    expectation: RawExpectation,
    fixture: Option<String>,
    fixture_p: Option<f64>,
    epsilon: Option<f64>,
    delta_grid: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProbe {
    fixture: String,
    fixture_p: Option<f64>,
    n: usize,
    #[serde(default = "default_range")]
    x_range: [f64; 2],
    epsilon: Vec<f64>,
    kappa: Option<Vec<f64>>,
    #[serde(default)]
    z: [f64; 2],
    dimension: Option<usize>,
    #[serde(default)]
    dump_fields: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlot {
    sources: Vec<String>,
}

/// A `ψ` entry: a built-in family or the unit-speed profile.
#[derive(Debug, Clone)]
pub enum Psi {
    Family(OrliczFunction),
    UnitSpeed,
}

impl Psi {
    pub fn family(&self) -> Option<&OrliczFunction> {
        match self {
            Psi::Family(f) => Some(f),
            Psi::UnitSpeed => None,
        }
    }
}

impl Profile for Psi {
    fn label(&self) -> String {
        match self {
            Psi::Family(f) => f.label(),
            Psi::UnitSpeed => UnitSpeed.label(),
        }
    }
    fn value(&self, t: f64) -> f64 {
        match self {
            Psi::Family(f) => f.value(t),
            Psi::UnitSpeed => UnitSpeed.value(t),
        }
    }
    fn deriv(&self, t: f64) -> f64 {
        match self {
            Psi::Family(f) => f.deriv(t),
            Psi::UnitSpeed => UnitSpeed.deriv(t),
        }
    }
    fn deriv2(&self, t: f64) -> f64 {
        match self {
            Psi::Family(f) => f.deriv2(t),
            Psi::UnitSpeed => UnitSpeed.deriv2(t),
        }
    }
    fn growth(&self, t: f64) -> f64 {
        match self {
            Psi::Family(f) => f.growth(t),
            Psi::UnitSpeed => UnitSpeed.growth(t),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub nx: usize,
    pub ny: usize,
    pub x_range: [f64; 2],
    pub y0: f64,
    pub epsilon: f64,
    pub f: Expr,
    pub g: Expr,
}

impl ProblemSpec {
    pub fn grid(&self) -> Grid2D {
        self.grid_with(self.nx, self.ny)
    }

    /// Grid with the same box origin and `x` extent, refined to `nx` nodes.
    pub fn grid_with(&self, nx: usize, ny: usize) -> Grid2D {
        let h = (self.x_range[1] - self.x_range[0]) / (nx - 1) as f64;
        Grid2D::new(nx, ny, h, (self.x_range[0], self.y0)).expect("validated grid")
    }

    /// `ny` for a refinement to `nx` nodes: the 1-D mode keeps 3 rows, square
    /// problems stay square.
    pub fn ny_for(&self, nx: usize) -> usize {
        if self.ny == 3 && self.nx != 3 {
            3
        } else if self.ny == self.nx {
            nx
        } else {
            (nx - 1) * (self.ny - 1) / (self.nx - 1) + 1
        }
    }
}

#[derive(Debug, Clone)]
pub enum FieldSource {
    Solve,
    Fixture(Fixture),
}

#[derive(Debug, Clone)]
pub struct VerifySpec {
    pub levels: Vec<usize>,
    pub balls: Vec<BallPair>,
    pub random_balls: usize,
    pub expectation: Expectation,
    pub source: FieldSource,
    pub epsilon: f64,
    pub delta_grid: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ProbeSpec {
    pub fixture: Fixture,
    pub grid: Grid2D,
    pub epsilons: Vec<f64>,
    pub kappas: Option<Vec<f64>>,
    pub z: [f64; 2],
    pub dimension: usize,
    pub dump_fields: bool,
    pub quadrature_order: usize,
}

impl ProbeSpec {
    /// κ values for one ε: the configured list, or `0.1·2^{-k}·√ε` for k = 0..4.
    pub fn kappa_ladder(&self, epsilon: f64) -> Vec<f64> {
        self.kappas
            .clone()
            .unwrap_or_else(|| (0..5).map(|k| 0.1 * 2f64.powi(-k) * epsilon.sqrt()).collect())
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub phi: OrliczFunction,
    pub psi: Vec<Psi>,
    pub problem: Option<ProblemSpec>,
    pub solver: SolverConfig,
    /// File name, inside the output directory, of the solver diagnostics table.
    pub diagnostics: String,
    pub dimension: usize,
    pub theta_grid: LogGridSpec,
    pub verify: Option<VerifySpec>,
    pub probe: Option<ProbeSpec>,
    pub plot_sources: Vec<PathBuf>,
}

/// serde reports an unknown key against the header of its enclosing table
/// (for arrays of tables, the first one), so scan the tables under that
/// header for the key itself.
fn unknown_key_line(source: &str, span: Range<usize>, msg: &str) -> Option<usize> {
    let key = msg.strip_prefix("unknown field `")?.split('`').next()?;
    let first = line_of(source, span);
    let mut header = None;
    for (i, line) in source.lines().enumerate().skip(first - 1) {
        let t = line.trim();
        if t.starts_with('[') {
            match header {
                None => header = Some(t),
                Some(h) if h != t => return None,
                Some(_) => {}
            }
            continue;
        }
        if let Some(rest) = t.strip_prefix(key) {
            if rest.trim_start().starts_with('=') {
                return Some(i + 1);
            }
        }
    }
    None
}

/// Line number (1-based) of `key` in the `occurrence`-th `[section]` or
/// `[[section]]`, or of the header itself when `key` is `None`.
fn locate(source: &str, section: &str, occurrence: usize, key: Option<&str>) -> Option<usize> {
    let mut current = String::new();
    let mut seen = 0usize;
    let mut header_line = None;
    for (i, line) in source.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            current = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if current == section {
                seen += 1;
                if seen == occurrence + 1 {
                    header_line = Some(i + 1);
                    if key.is_none() {
                        return header_line;
                    }
                }
            }
            continue;
        }
        if current == section && seen == occurrence + 1 {
            if let Some(k) = key {
                if let Some(rest) = t.strip_prefix(k) {
                    if rest.trim_start().starts_with('=') {
                        return Some(i + 1);
                    }
                }
            }
        }
    }
    header_line
}

fn line_of(source: &str, span: Range<usize>) -> usize {
    source[..span.start.min(source.len())].matches('\n').count() + 1
}

struct Ctx<'a> {
    source: &'a str,
}

impl Ctx<'_> {
    fn err<T>(
        &self,
        section: &str,
        occurrence: usize,
        key: Option<&str>,
        msg: impl Into<String>,
    ) -> Result<T, ConfigError> {
        Err(ConfigError {
            line: locate(self.source, section, occurrence, key),
            msg: msg.into(),
        })
    }

    fn expr(&self, section: &str, key: &str, text: &str) -> Result<Expr, ConfigError> {
        Expr::parse(text).or_else(|e| self.err(section, 0, Some(key), format!("{section}.{key}: {e}")))
    }

    fn family(&self, section: &str, occurrence: usize, fc: &FamilyConfig) -> Result<OrliczFunction, ConfigError> {
        let Some(spec) = fc.to_spec() else {
            return self.err(
                section,
                occurrence,
                Some("kind"),
                format!("{section}: unit_speed is only allowed for psi"),
            );
        };
        make_family(&spec).or_else(|e| self.err(section, occurrence, Some("kind"), format!("{section}: {e}")))
    }
}

fn parse_fixture(name: &str, p: Option<f64>) -> Option<Fixture> {
    Some(match name {
        "saddle" => Fixture::Saddle,
        "sin_cos" => Fixture::SinCos,
        "mixed" => Fixture::Mixed,
        "p_laplace_profile" => Fixture::PLaplaceProfile {
            p: p.filter(|p| *p > 1.0)?,
        },
        _ => return None,
    })
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            msg: format!("cannot read {}: {e}", path.display()),
        })?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for s in &mut cfg.plot_sources {
            if s.is_relative() {
                *s = base.join(&*s);
            }
        }
        Ok(cfg)
    }

    pub fn parse(source: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(source).map_err(|e| ConfigError {
            line: e
                .span()
                .map(|s| unknown_key_line(source, s.clone(), e.message()).unwrap_or_else(|| line_of(source, s))),
            msg: e.message().trim().to_string(),
        })?;
        let cx = Ctx { source };

        let phi = cx.family("phi", 0, &raw.phi)?;
        let mut psi = Vec::with_capacity(raw.psi.len());
        for (i, p) in raw.psi.iter().enumerate() {
            psi.push(match p {
                FamilyConfig::UnitSpeed {} => Psi::UnitSpeed,
                other => Psi::Family(cx.family("psi", i, other)?),
            });
        }

        let problem = match &raw.problem {
            None => None,
            Some(p) => {
                let ny = p.ny.unwrap_or(p.n);
                if p.n < 3 || ny < 3 {
                    return cx.err(
                        "problem",
                        0,
                        Some("n"),
                        "problem grids need at least 3 nodes per direction",
                    );
                }
                let [a, b] = p.x_range;
                if !(a.is_finite() && b.is_finite() && b > a) {
                    return cx.err(
                        "problem",
                        0,
                        Some("x_range"),
                        "x_range must be an increasing pair of finite numbers",
                    );
                }
                if !(p.epsilon > 0.0 && p.epsilon <= 1.0) {
                    return cx.err("problem", 0, Some("epsilon"), "epsilon must lie in (0, 1]");
                }
                Some(ProblemSpec {
                    nx: p.n,
                    ny,
                    x_range: p.x_range,
                    y0: p.y0.unwrap_or(a),
                    epsilon: p.epsilon,
                    f: cx.expr("problem", "f", &p.f)?,
                    g: cx.expr("problem", "g", &p.g)?,
                })
            }
        };

        let s = &raw.solver;
        let d = SolverConfig::default();
        let solver = SolverConfig {
            residual_tol: s.residual_tol.unwrap_or(d.residual_tol),
            max_newton_iters: s.max_newton_iters.unwrap_or(d.max_newton_iters),
            armijo: s.armijo.unwrap_or(d.armijo),
            epsilon_schedule: s.epsilon_schedule.clone().unwrap_or_default(),
            fallback_gd_iters: s.fallback_gd_iters.unwrap_or(d.fallback_gd_iters),
            cg_rel_tol: s.cg_rel_tol.unwrap_or(d.cg_rel_tol),
            cg_max_iters: s.cg_max_iters.unwrap_or(d.cg_max_iters),
        };
        if let Some(p) = &problem {
            if let Err(e) = solver.validate(p.epsilon) {
                let key = if e.to_string().contains("schedule") {
                    Some("epsilon_schedule")
                } else {
                    None
                };
                return cx.err("solver", 0, key, e.to_string());
            }
        }

        let diagnostics = s.diagnostics.clone().unwrap_or_else(|| "diagnostics.csv".into());
        if diagnostics.is_empty() || diagnostics.contains(['/', '\\']) || diagnostics.starts_with('.') {
            return cx.err(
                "solver",
                0,
                Some("diagnostics"),
                "diagnostics must be a plain file name inside the output directory",
            );
        }

        let dimension = raw.check.dimension.unwrap_or(2);
        if dimension < 2 {
            return cx.err("check", 0, Some("dimension"), "dimension must be at least 2");
        }
        let std_grid = LogGridSpec::standard();
        let theta_grid = LogGridSpec {
            lo: raw.check.t_min.unwrap_or(std_grid.lo),
            hi: raw.check.t_max.unwrap_or(std_grid.hi),
            n: raw.check.samples.unwrap_or(std_grid.n),
        };
        if !(theta_grid.lo > 0.0 && theta_grid.lo <= 1e-6 && theta_grid.hi >= 1e6 && theta_grid.n >= 256) {
            return cx.err(
                "check",
                0,
                None,
                "check grid must cover [1e-6, 1e6] (0 < t_min <= 1e-6, t_max >= 1e6) with at least 256 samples",
            );
        }

        let verify = match &raw.verify {
            None => None,
            Some(v) => Some(validate_verify(&cx, v, problem.as_ref(), &psi)?),
        };

        let probe = match &raw.probe {
            None => None,
            Some(p) => {
                let Some(fixture) = parse_fixture(&p.fixture, p.fixture_p) else {
                    return cx.err(
                        "probe",
                        0,
                        Some("fixture"),
                        format!(
                            "unknown fixture '{}' (p_laplace_profile needs fixture_p > 1)",
                            p.fixture
                        ),
                    );
                };
                let [a, b] = p.x_range;
                if p.n < 5 || !(b > a) {
                    return cx.err(
                        "probe",
                        0,
                        Some("n"),
                        "probe grid needs at least 5 nodes and an increasing x_range",
                    );
                }
                let grid = Grid2D::square(p.n, a, b).expect("checked above");
                if p.epsilon.is_empty() || p.epsilon.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
                    return cx.err(
                        "probe",
                        0,
                        Some("epsilon"),
                        "probe epsilon must be a non-empty list in (0, 1]",
                    );
                }
                if let Some(ks) = &p.kappa {
                    let min_eps = p.epsilon.iter().copied().fold(f64::INFINITY, f64::min);
                    if ks.is_empty() || ks.iter().any(|&k| !(k > 0.0 && k < 0.5 * min_eps.sqrt())) {
                        return cx.err(
                            "probe",
                            0,
                            Some("kappa"),
                            "every kappa must satisfy 0 < kappa < sqrt(epsilon)/2 for all probe epsilons",
                        );
                    }
                }
                if psi.iter().all(|p| p.family().is_none()) {
                    return cx.err("psi", 0, None, "probe needs at least one psi family");
                }
                let dimension = p.dimension.unwrap_or(dimension);
                if dimension < 2 {
                    return cx.err("probe", 0, Some("dimension"), "dimension must be at least 2");
                }
                Some(ProbeSpec {
                    fixture,
                    grid,
                    epsilons: p.epsilon.clone(),
                    kappas: p.kappa.clone(),
                    z: p.z,
                    dimension,
                    dump_fields: p.dump_fields,
                    quadrature_order: DEFAULT_QUADRATURE_ORDER,
                })
            }
        };

        let plot_sources = raw
            .plotdata
            .as_ref()
            .map(|p| p.sources.iter().map(PathBuf::from).collect())
            .unwrap_or_default();
        if raw.plotdata.as_ref().is_some_and(|p| p.sources.is_empty()) {
            return cx.err("plotdata", 0, Some("sources"), "plotdata.sources must not be empty");
        }

        Ok(Self {
            phi,
            psi,
            problem,
            solver,
            diagnostics,
            dimension,
            theta_grid,
            verify,
            probe,
            plot_sources,
        })
    }
}

fn validate_verify(
    cx: &Ctx<'_>,
    v: &RawVerify,
    problem: Option<&ProblemSpec>,
    psi: &[Psi],
) -> Result<VerifySpec, ConfigError> {
    if psi.is_empty() {
        return cx.err("verify", 0, None, "verify needs at least one [[psi]] entry");
    }
    if v.levels.len() < 2 || v.levels.windows(2).any(|w| w[1] <= w[0]) || v.levels[0] < 5 {
        return cx.err(
            "verify",
            0,
            Some("levels"),
            "levels must be at least two increasing node counts, each >= 5",
        );
    }
    let source = match &v.fixture {
        None => FieldSource::Solve,
        Some(name) => match parse_fixture(name, v.fixture_p) {
            Some(f) => FieldSource::Fixture(f),
            None => {
                return cx.err(
                    "verify",
                    0,
                    Some("fixture"),
                    format!("unknown fixture '{name}' (p_laplace_profile needs fixture_p > 1)"),
                )
            }
        },
    };
    let Some(problem) = problem else {
        return cx.err(
            "verify",
            0,
            None,
            "verify needs a [problem] section for its domain and source term",
        );
    };
    if problem.ny != problem.nx {
        return cx.err("problem", 0, Some("ny"), "verify needs a square grid (ny = n)");
    }
    let epsilon = v.epsilon.unwrap_or(match source {
        FieldSource::Solve => problem.epsilon,
        FieldSource::Fixture(_) => 0.0,
    });
    if !(epsilon >= 0.0) {
        return cx.err("verify", 0, Some("epsilon"), "epsilon must be non-negative");
    }
    if v.balls.is_empty() && v.random_balls == 0 {
        return cx.err("verify", 0, Some("balls"), "verify needs at least one ball");
    }
    let coarse = problem.grid_with(v.levels[0], v.levels[0]);
    let mut balls = Vec::with_capacity(v.balls.len());
    for (i, b) in v.balls.iter().enumerate() {
        let ball = BallPair::new((b.center[0], b.center[1]), b.r)
            .and_then(|ball| ball.check(&coarse).map(|_| ball))
            .or_else(|e| cx.err("verify", 0, Some("balls"), format!("ball {i}: {e}")))?;
        balls.push(ball);
    }
    let delta_grid = v.delta_grid.clone().unwrap_or_else(|| vec![0.05, 0.1, 0.2]);
    if delta_grid.is_empty() || delta_grid.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return cx.err(
            "verify",
            0,
            Some("delta_grid"),
            "delta_grid must be non-empty and positive",
        );
    }
    Ok(VerifySpec {
        levels: v.levels.clone(),
        balls,
        random_balls: v.random_balls,
        expectation: match v.expectation {
            RawExpectation::Bounded => Expectation::Bounded,
            RawExpectation::Divergent => Expectation::Divergent,
            RawExpectation::LhsConverges => Expectation::LhsConverges,
            RawExpectation::LhsDiverges => Expectation::LhsDiverges,
        },
        source,
        epsilon,
        delta_grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[phi]
kind = "power"
p = 3.0

[[psi]]
kind = "derived_sqrt"
base = { kind = "power", p = 3.0 }

[[psi]]
kind = "unit_speed"

[problem]
n = 33
epsilon = 1e-6
f = "1"
g = "x^2 - y^2"

[solver]
epsilon_schedule = [1e-2, 1e-4, 1e-6]

[verify]
levels = [33, 65]
balls = [{ center = [0.0, 0.0], r = 0.2 }]
"#;

    #[test]
    fn parses_full_config() {
        let c = ExperimentConfig::parse(BASE).unwrap();
        assert_eq!(c.phi.name(), "power(3)");
        assert_eq!(c.psi.len(), 2);
        assert!(matches!(c.psi[1], Psi::UnitSpeed));
        let p = c.problem.unwrap();
        assert_eq!((p.nx, p.ny, p.y0), (33, 33, -1.0));
        assert_eq!(p.g.eval(2.0, 1.0), 3.0);
        assert_eq!(c.solver.epsilon_schedule, vec![1e-2, 1e-4, 1e-6]);
        let v = c.verify.unwrap();
        assert_eq!(v.epsilon, 1e-6);
        assert_eq!(v.expectation, Expectation::Bounded);
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let bad = BASE.replace("p = 3.0\n\n[[psi]]", "p = = 3.0\n\n[[psi]]");
        let e = ExperimentConfig::parse(&bad).unwrap_err();
        assert_eq!(e.line, Some(4), "{e}");
    }

    #[test]
    fn semantic_errors_carry_lines() {
        let e = ExperimentConfig::parse(&BASE.replace("p = 3.0\n\n[[psi]]", "p = 0.5\n\n[[psi]]")).unwrap_err();
        assert_eq!(e.line, Some(3), "{e}");
        let e = ExperimentConfig::parse(&BASE.replace("g = \"x^2 - y^2\"", "g = \"x^2 - q\"")).unwrap_err();
        assert_eq!(e.line, Some(17), "{e}");
        assert!(e.msg.contains("column 7"));
        let e = ExperimentConfig::parse(&BASE.replace("[1e-2, 1e-4, 1e-6]", "[1e-2, 1e-6, 1e-4]")).unwrap_err();
        assert_eq!(e.line, Some(20), "{e}");
        let e = ExperimentConfig::parse(&BASE.replace("r = 0.2", "r = 0.6")).unwrap_err();
        assert_eq!(e.line, Some(24), "{e}");
        let e = ExperimentConfig::parse(&BASE.replace("kind = \"unit_speed\"", "kind = \"unit_speed\"\np = 2.0"))
            .unwrap_err();
        assert_eq!(e.line, Some(12), "{e}");
    }

    #[test]
    fn unit_speed_phi_is_rejected() {
        let e = ExperimentConfig::parse(&BASE.replacen("kind = \"power\"\np = 3.0", "kind = \"unit_speed\"", 1))
            .unwrap_err();
        assert!(e.msg.contains("only allowed for psi"));
        assert_eq!(e.line, Some(3));
    }

    #[test]
    fn locate_finds_nth_table() {
        let src = "[[psi]]\nkind = \"a\"\n[[psi]]\nkind = \"b\"\n";
        assert_eq!(locate(src, "psi", 1, Some("kind")), Some(4));
        assert_eq!(locate(src, "psi", 0, None), Some(1));
        assert_eq!(locate(src, "phi", 0, None), None);
    }

    #[test]
    fn one_dimensional_refinement_keeps_three_rows() {
        let c = ExperimentConfig::parse(
            &BASE
                .replace("n = 33\n", "n = 33\nny = 3\n")
                .replace("[verify]", "[other]")
                .replace("levels = [33, 65]\nballs = [{ center = [0.0, 0.0], r = 0.2 }]\n", ""),
        )
        .unwrap_err();
        assert!(c.msg.contains("other"), "{c}");
        let src = BASE.replace("n = 33\n", "n = 33\nny = 3\n");
        let end = src.find("[verify]").unwrap();
        let p = ExperimentConfig::parse(&src[..end]).unwrap().problem.unwrap();
        assert_eq!(p.ny_for(129), 3);
        assert_eq!(p.grid().ny(), 3);
    }
}
