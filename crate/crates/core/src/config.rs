//! Line-oriented run configuration.
//!
//! ```text
//! # comment
//! lambda = 3
//! loop.dt = 1e-3
//! u0.poly = 0 0 1.75
//! ```
//!
//! Keys are dotted, one `key = value` per line, `#` starts a comment.
//! Unknown and repeated keys are rejected. The physical constants `lambda`,
//! `k`, `gamma`, `rho` and `y_r` have no defaults.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::control::{LoopConfig, Scheme};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::params::SystemParams;

/// Initial plant profile.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialProfile {
    /// Polynomial coefficients, constant term first.
    Polynomial(Vec<f64>),
    Preset(Preset),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `7x²/4`, the profile of the reference experiment.
    Reference,
    Zero,
    /// The analytic closed-loop equilibrium.
    Equilibrium,
}

impl Preset {
    fn name(self) -> &'static str {
        match self {
            Preset::Reference => "reference",
            Preset::Zero => "zero",
            Preset::Equilibrium => "equilibrium",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "reference" => Ok(Preset::Reference),
            "zero" => Ok(Preset::Zero),
            "equilibrium" => Ok(Preset::Equilibrium),
            other => Err(format!(
                "unknown preset {other:?} (expected reference, zero or equilibrium)"
            )),
        }
    }
}

impl InitialProfile {
    pub fn field(&self, params: &SystemParams, grid: &Grid) -> Result<Field> {
        Ok(match self {
            InitialProfile::Polynomial(c) => Field::polynomial(grid, c),
            InitialProfile::Preset(Preset::Reference) => Field::polynomial(grid, &[0.0, 0.0, 1.75]),
            InitialProfile::Preset(Preset::Zero) => Field::zeros(grid),
            InitialProfile::Preset(Preset::Equilibrium) => {
                crate::steady::equilibrium(params.k_true, params, grid)?.u_bar
            }
        })
    }
}

/// Measurement-noise hooks. The compensator and the observer injection
/// draw from independent streams of the same seeded generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub seed: u64,
    /// Standard deviation of the noise on `y` as read by the compensator.
    pub output_std: f64,
    /// Standard deviation of the noise on `y` as read by the observer.
    pub injection_std: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            seed: 0,
            output_std: 0.0,
            injection_std: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub n: usize,
    pub loop_cfg: LoopConfig,
    pub u0: InitialProfile,
    pub chi0: f64,
    pub estimator: bool,
    pub observer: bool,
    /// Observer initial profile, polynomial coefficients.
    pub observer_u0: Vec<f64>,
    pub epsilon: Option<f64>,
    pub theta: f64,
    pub noise: NoiseConfig,
    pub out_dir: PathBuf,
    pub plots: bool,
}

impl RunConfig {
    /// Reference experiment: λ = 3, k = 2, γ = 2, ρ = 4.5, y_r = 1,
    /// u₀ = 7x²/4, with the toolkit's numerical choices n = 201,
    /// dt = 1e-3, t_end = 10 and the observer enabled with α = 2.
    pub fn reference() -> Self {
        RunConfig {
            params: SystemParams::reference(),
            n: 201,
            loop_cfg: LoopConfig::default(),
            u0: InitialProfile::Preset(Preset::Reference),
            chi0: 0.0,
            estimator: true,
            observer: true,
            observer_u0: vec![0.0],
            epsilon: None,
            theta: crate::analysis::DEFAULT_THETA,
            noise: NoiseConfig::default(),
            out_dir: PathBuf::from("out"),
            plots: true,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.loop_cfg.validate()?;
        Grid::new(self.n)?;
        if self.estimator && self.params.y_r == 0.0 {
            return Err(Error::validation(
                "y_r",
                "must be nonzero when estimator.enabled = true",
            ));
        }
        if self.observer && !self.estimator {
            return Err(Error::validation(
                "observer.enabled",
                "the observer needs the estimator (estimator.enabled = true)",
            ));
        }
        if let InitialProfile::Polynomial(c) = &self.u0 {
            check_poly("u0.poly", c)?;
        }
        check_poly("observer.u0.poly", &self.observer_u0)?;
        if !self.chi0.is_finite() {
            return Err(Error::validation("chi0", "must be finite"));
        }
        if let Some(e) = self.epsilon {
            let bound = self.params.epsilon_bound();
            if !(e > 0.0 && e < bound) {
                return Err(Error::validation(
                    "analysis.epsilon",
                    format!("must lie in (0, sqrt(lambda/rho)) = (0, {bound}) (got {e})"),
                ));
            }
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::validation("analysis.theta", "must be finite and >= 0"));
        }
        for (name, v) in [
            ("noise.output_std", self.noise.output_std),
            ("noise.injection_std", self.noise.injection_std),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::validation(name, "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    /// Sets one key from its textual value, as in a config file.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "lambda" => self.params.lambda = num(value)?,
            "k" => self.params.k_true = num(value)?,
            "gamma" => self.params.gamma = num(value)?,
            "rho" => self.params.rho = num(value)?,
            "y_r" => self.params.y_r = num(value)?,
            "alpha" => self.params.alpha = num(value)?,
            "grid.n" => self.n = int(value)?,
            "loop.dt" => self.loop_cfg.dt = num(value)?,
            "loop.t_end" => self.loop_cfg.t_end = num(value)?,
            "loop.scheme" => {
                self.loop_cfg.scheme = value.parse::<Scheme>().map_err(|e| e.to_string())?
            }
            "loop.record_every" => self.loop_cfg.record_every = int(value)?,
            "u0.poly" => self.u0 = InitialProfile::Polynomial(nums(value)?),
            "u0.preset" => self.u0 = InitialProfile::Preset(value.parse()?),
            "chi0" => self.chi0 = num(value)?,
            "estimator.enabled" => self.estimator = boolean(value)?,
            "observer.enabled" => self.observer = boolean(value)?,
            "observer.u0.poly" => self.observer_u0 = nums(value)?,
            "analysis.epsilon" => self.epsilon = Some(num(value)?),
            "analysis.theta" => self.theta = num(value)?,
            "noise.seed" => self.noise.seed = value.parse().map_err(|_| format!("expected an unsigned integer, got {value:?}"))?,
            "noise.output_std" => self.noise.output_std = num(value)?,
            "noise.injection_std" => self.noise.injection_std = num(value)?,
            "output.dir" => self.out_dir = PathBuf::from(value),
            "output.plots" => self.plots = boolean(value)?,
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    /// Parses configuration text; `source_name` labels error messages.
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut cfg = RunConfig::reference();
        let mut seen: Vec<&str> = Vec::new();
        let parse_err = |line: usize, message: String| Error::Parse {
            source_name: source_name.to_string(),
            line,
            message,
        };
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(parse_err(line_no, format!("expected `key = value`, got {line:?}")));
            };
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key) {
                return Err(parse_err(line_no, format!("duplicate key {key:?}")));
            }
            if key == "u0.poly" && seen.contains(&"u0.preset")
                || key == "u0.preset" && seen.contains(&"u0.poly")
            {
                return Err(parse_err(line_no, "u0.poly and u0.preset are exclusive".into()));
            }
            cfg.set(key, value)
                .map_err(|m| parse_err(line_no, format!("{key}: {m}")))?;
            seen.push(key);
        }
        for required in REQUIRED {
            if !seen.contains(required) {
                return Err(Error::validation(
                    *required,
                    "physical constants must be given explicitly",
                ));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Text that [`RunConfig::parse`] maps back to an equal config.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("lambda", p.lambda.to_string());
        kv("k", p.k_true.to_string());
        kv("gamma", p.gamma.to_string());
        kv("rho", p.rho.to_string());
        kv("y_r", p.y_r.to_string());
        kv("alpha", p.alpha.to_string());
        kv("grid.n", self.n.to_string());
        kv("loop.dt", self.loop_cfg.dt.to_string());
        kv("loop.t_end", self.loop_cfg.t_end.to_string());
        kv("loop.scheme", self.loop_cfg.scheme.name().to_string());
        kv("loop.record_every", self.loop_cfg.record_every.to_string());
        match &self.u0 {
            InitialProfile::Polynomial(c) => kv("u0.poly", join(c)),
            InitialProfile::Preset(p) => kv("u0.preset", p.name().to_string()),
        }
        kv("chi0", self.chi0.to_string());
        kv("estimator.enabled", self.estimator.to_string());
        kv("observer.enabled", self.observer.to_string());
        kv("observer.u0.poly", join(&self.observer_u0));
        if let Some(e) = self.epsilon {
            kv("analysis.epsilon", e.to_string());
        }
        kv("analysis.theta", self.theta.to_string());
        kv("noise.seed", self.noise.seed.to_string());
        kv("noise.output_std", self.noise.output_std.to_string());
        kv("noise.injection_std", self.noise.injection_std.to_string());
        kv("output.dir", self.out_dir.display().to_string());
        kv("output.plots", self.plots.to_string());
        s
    }
}

const REQUIRED: &[&str] = &["lambda", "k", "gamma", "rho", "y_r"];

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::parse(&text, &path.display().to_string())
}

fn check_poly(name: &str, c: &[f64]) -> Result<()> {
    if c.is_empty() || c.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation(name, "needs at least one finite coefficient"));
    }
    Ok(())
}

fn num(v: &str) -> std::result::Result<f64, String> {
    v.parse::<f64>()
        .map_err(|_| format!("expected a number, got {v:?}"))
}

fn int(v: &str) -> std::result::Result<usize, String> {
    v.parse::<usize>()
        .map_err(|_| format!("expected a nonnegative integer, got {v:?}"))
}

fn nums(v: &str) -> std::result::Result<Vec<f64>, String> {
    v.split_whitespace().map(num).collect()
}

fn boolean(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(format!("expected true or false, got {v:?}")),
    }
}

fn join(c: &[f64]) -> String {
    c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const REFERENCE: &str = "\
# reference experiment
lambda = 3
k = 2
gamma = 2
rho = 4.5
y_r = 1
u0.poly = 0 0 1.75   # 7x^2/4
";

    #[test]
    fn parses_reference_file() {
        let cfg = RunConfig::parse(REFERENCE, "ref.cfg").unwrap();
        assert_eq!(cfg.params.lambda, 3.0);
        assert_eq!(cfg.params.k_true, 2.0);
        assert_eq!(cfg.params.gamma, 2.0);
        assert_eq!(cfg.params.rho, 4.5);
        assert_eq!(cfg.params.y_r, 1.0);
        assert_eq!(cfg.u0, InitialProfile::Polynomial(vec![0.0, 0.0, 1.75]));
        assert_eq!(cfg.n, 201);
    }

    #[test]
    fn unknown_key_is_named_with_line() {
        let text = format!("{REFERENCE}loop.dtt = 1\n");
        let err = RunConfig::parse(&text, "x.cfg").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("loop.dtt") && msg.contains(":8:"), "{msg}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = RunConfig::parse("lambda = 3\nk two\n", "x").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = RunConfig::parse("lambda = abc\n", "x").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = RunConfig::parse("lambda = 3\nlambda = 4\n", "x").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn physical_constants_are_required() {
        let text = REFERENCE.replace("rho = 4.5\n", "");
        let err = RunConfig::parse(&text, "x").unwrap_err();
        assert!(matches!(err, Error::Validation { ref what, .. } if what == "rho"), "{err}");
    }

    #[test]
    fn zero_reference_needs_estimator_off() {
        let text = REFERENCE.replace("y_r = 1", "y_r = 0");
        let err = RunConfig::parse(&text, "x").unwrap_err();
        assert!(err.to_string().contains("y_r"));
        let ok = format!("{text}estimator.enabled = false\nobserver.enabled = false\n");
        assert!(RunConfig::parse(&ok, "x").is_ok());
    }

    #[test]
    fn negative_lambda_is_rejected() {
        let text = REFERENCE.replace("lambda = 3", "lambda = -3");
        let err = RunConfig::parse(&text, "x").unwrap_err();
        assert!(matches!(err, Error::Validation { ref what, .. } if what == "lambda"));
    }

    #[test]
    fn other_validation_paths() {
        for extra in [
            "analysis.epsilon = 0.9\n",
            "analysis.epsilon = 0\n",
            "grid.n = 2\n",
            "loop.record_every = 0\n",
            "noise.output_std = -1\n",
            "loop.scheme = rk4\n",
            "u0.preset = gaussian\n",
            "u0.preset = zero\n",
        ] {
            assert!(RunConfig::parse(&format!("{REFERENCE}{extra}"), "x").is_err(), "{extra}");
        }
        let off = format!("{REFERENCE}estimator.enabled = false\n");
        assert!(RunConfig::parse(&off, "x").is_err(), "observer without estimator");
    }

    #[test]
    fn reference_round_trips() {
        let cfg = RunConfig::reference();
        let back = RunConfig::parse(&cfg.to_config_string(), "x").unwrap();
        assert_eq!(back, cfg);
    }

    proptest! {
        #[test]
        fn config_round_trip(
            lambda in 0.01f64..100.0,
            k in 0.01f64..100.0,
            y_r in prop::sample::select(vec![-2.5, 0.3, 1.0, 7.0]),
            n in 3usize..500,
            dt in 1e-5f64..1e-1,
            chi0 in -5.0f64..5.0,
            poly in prop::collection::vec(-3.0f64..3.0, 1..5),
            eps in prop::option::of(0.01f64..0.99),
            cn in any::<bool>(),
            seed in any::<u64>(),
        ) {
            let mut cfg = RunConfig::reference();
            cfg.params.lambda = lambda;
            cfg.params.k_true = k;
            cfg.params.y_r = y_r;
            cfg.n = n;
            cfg.loop_cfg.dt = dt;
            cfg.loop_cfg.scheme = if cn { Scheme::CrankNicolson } else { Scheme::ImplicitEuler };
            cfg.chi0 = chi0;
            cfg.u0 = InitialProfile::Polynomial(poly);
            cfg.epsilon = eps.map(|f| f * cfg.params.epsilon_bound());
            cfg.noise.seed = seed;
            cfg.validate().unwrap();
            let back = RunConfig::parse(&cfg.to_config_string(), "x").unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
