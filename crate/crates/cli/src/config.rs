//! Flat `key = value` run configuration.
//!
//! Blank lines and text after `#` are ignored. Lists are comma separated.
//! Unknown keys, repeated keys and unparsable values are errors that name
//! the key and the line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nslimit_core::solvers::{PhysicalParams, StepperConfig};

use crate::CliError;

/// Initial-data presets.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    /// Taylor-Green vortex (in the first two coordinates) plus
    /// `perturbation · sin(x₁) e₁`.
    TaylorGreen,
    /// `sin(x₁/ε) φ(x) e₂` with the smooth bump `φ`.
    Oscillatory { epsilon: f64 },
    /// Seeded random velocity with a power-law envelope.
    Random,
    /// Velocity (and optionally density) read from snapshot files.
    File { velocity: PathBuf, density: Option<PathBuf> },
}

/// Which solvers `simulate` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunKind {
    Both,
    Compressible,
    Incompressible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub n: usize,
    pub mu: f64,
    pub nu: f64,
    pub nu_list: Vec<f64>,
    pub gamma: f64,
    pub p: f64,
    pub horizon: f64,
    pub cfl: f64,
    pub dt_max: f64,
    /// Time between snapshots.
    pub snapshot_stride: f64,
    pub layer_ratio: f64,
    pub seed: u64,
    pub preset: Preset,
    pub amplitude: f64,
    pub perturbation: f64,
    pub density_amplitude: f64,
    pub envelope: f64,
    pub spectrum_exponent: Option<f64>,
    pub spectrum_cutoff: Option<f64>,
    pub run: RunKind,
    pub save_snapshots: bool,
    pub output_dir: PathBuf,
    pub lemmas: Vec<String>,
    pub lemma_trials: usize,
    pub lemma_grids: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            n: 32,
            mu: 1.0,
            nu: 10.0,
            nu_list: vec![10.0, 40.0, 160.0, 640.0],
            gamma: 2.0,
            p: 2.0,
            horizon: 1.0,
            cfl: 0.4,
            dt_max: 0.01,
            snapshot_stride: 0.1,
            layer_ratio: 0.1,
            seed: 1,
            preset: Preset::TaylorGreen,
            amplitude: 1.0,
            perturbation: 0.0,
            density_amplitude: 0.0,
            envelope: nslimit_core::lemmas::ENVELOPE_WIDTH,
            spectrum_exponent: None,
            spectrum_cutoff: None,
            run: RunKind::Both,
            save_snapshots: true,
            output_dir: PathBuf::from("out"),
            lemmas: nslimit_core::lemmas::LEMMA_IDS.iter().map(|s| s.to_string()).collect(),
            lemma_trials: 100,
            lemma_grids: vec![32, 64],
        }
    }
}

/// Every key the parser accepts.
pub const KEYS: &[&str] = &[
    "d",
    "n",
    "mu",
    "nu",
    "lambda",
    "nu_list",
    "gamma",
    "p",
    "horizon",
    "cfl",
    "dt_max",
    "snapshot_stride",
    "layer_ratio",
    "seed",
    "initial",
    "epsilon",
    "amplitude",
    "perturbation",
    "density_amplitude",
    "envelope",
    "spectrum_exponent",
    "spectrum_cutoff",
    "velocity_file",
    "density_file",
    "run",
    "save_snapshots",
    "output_dir",
    "lemmas",
    "lemma_trials",
    "lemma_grids",
];

struct Entry {
    line: usize,
    value: String,
}

fn err(key: &str, line: usize, message: impl Into<String>) -> CliError {
    CliError::Config {
        key: key.to_string(),
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, e: &Entry) -> Result<T, CliError> {
    e.value
        .parse()
        .map_err(|_| err(key, e.line, format!("cannot parse '{}'", e.value)))
}

fn parse_list<T: std::str::FromStr>(key: &str, e: &Entry) -> Result<Vec<T>, CliError> {
    e.value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| err(key, e.line, format!("cannot parse list item '{}'", s.trim())))
        })
        .collect()
}

fn parse_bool(key: &str, e: &Entry) -> Result<bool, CliError> {
    match e.value.as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        v => Err(err(key, e.line, format!("expected true or false, got '{v}'"))),
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err("--config", 0, format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(err(body, line, "expected 'key = value'"));
            };
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(err(k, line, "unknown key"));
            }
            if v.is_empty() {
                return Err(err(k, line, "missing value"));
            }
            if let Some(prev) = entries.get(k) {
                return Err(err(k, line, format!("repeated key (first set on line {})", prev.line)));
            }
            entries.insert(
                k.to_string(),
                Entry {
                    line,
                    value: v.to_string(),
                },
            );
        }
        let mut c = RunConfig::default();
        let get = |k: &str| entries.get(k);
        if let Some(e) = get("d") {
            c.dim = parse_num("d", e)?;
        }
        if let Some(e) = get("n") {
            c.n = parse_num("n", e)?;
        }
        if let Some(e) = get("mu") {
            c.mu = parse_num("mu", e)?;
        }
        match (get("nu"), get("lambda")) {
            (Some(_), Some(e)) => return Err(err("lambda", e.line, "set either nu or lambda, not both")),
            (Some(e), None) => c.nu = parse_num("nu", e)?,
            (None, Some(e)) => c.nu = parse_num::<f64>("lambda", e)? + 2.0 * c.mu,
            (None, None) => {}
        }
        if let Some(e) = get("nu_list") {
            c.nu_list = parse_list("nu_list", e)?;
        }
        if let Some(e) = get("gamma") {
            c.gamma = parse_num("gamma", e)?;
        }
        if let Some(e) = get("p") {
            c.p = parse_num("p", e)?;
        }
        if let Some(e) = get("horizon") {
            c.horizon = parse_num("horizon", e)?;
        }
        if let Some(e) = get("cfl") {
            c.cfl = parse_num("cfl", e)?;
        }
        if let Some(e) = get("dt_max") {
            c.dt_max = parse_num("dt_max", e)?;
        }
        if let Some(e) = get("snapshot_stride") {
            c.snapshot_stride = parse_num("snapshot_stride", e)?;
        }
        if let Some(e) = get("layer_ratio") {
            c.layer_ratio = parse_num("layer_ratio", e)?;
        }
        if let Some(e) = get("seed") {
            c.seed = parse_num("seed", e)?;
        }
        if let Some(e) = get("amplitude") {
            c.amplitude = parse_num("amplitude", e)?;
        }
        if let Some(e) = get("perturbation") {
            c.perturbation = parse_num("perturbation", e)?;
        }
        if let Some(e) = get("density_amplitude") {
            c.density_amplitude = parse_num("density_amplitude", e)?;
        }
        if let Some(e) = get("envelope") {
            c.envelope = parse_num("envelope", e)?;
        }
        if let Some(e) = get("spectrum_exponent") {
            c.spectrum_exponent = Some(parse_num("spectrum_exponent", e)?);
        }
        if let Some(e) = get("spectrum_cutoff") {
            c.spectrum_cutoff = Some(parse_num("spectrum_cutoff", e)?);
        }
        if let Some(e) = get("save_snapshots") {
            c.save_snapshots = parse_bool("save_snapshots", e)?;
        }
        if let Some(e) = get("output_dir") {
            c.output_dir = PathBuf::from(&e.value);
        }
        if let Some(e) = get("lemmas") {
            c.lemmas = if e.value == "all" {
                RunConfig::default().lemmas
            } else {
                e.value.split(',').map(|s| s.trim().to_string()).collect()
            };
            if let Some(bad) = c.lemmas.iter().find(|l| !nslimit_core::lemmas::LEMMA_IDS.contains(&l.as_str())) {
                return Err(err("lemmas", e.line, format!("unknown lemma '{bad}'")));
            }
        }
        if let Some(e) = get("lemma_trials") {
            c.lemma_trials = parse_num("lemma_trials", e)?;
        }
        if let Some(e) = get("lemma_grids") {
            c.lemma_grids = parse_list("lemma_grids", e)?;
        }
        if let Some(e) = get("run") {
            c.run = match e.value.as_str() {
                "both" => RunKind::Both,
                "compressible" => RunKind::Compressible,
                "incompressible" => RunKind::Incompressible,
                v => return Err(err("run", e.line, format!("expected both, compressible or incompressible, got '{v}'"))),
            };
        }
        let initial = get("initial").map(|e| (e.value.as_str(), e.line));
        c.preset = match initial {
            None | Some(("taylor_green", _)) => Preset::TaylorGreen,
            Some(("oscillatory", _)) => {
                let epsilon = match get("epsilon") {
                    Some(e) => parse_num("epsilon", e)?,
                    None => 0.25,
                };
                Preset::Oscillatory { epsilon }
            }
            Some(("random", _)) => Preset::Random,
            Some(("file", line)) => {
                let velocity = get("velocity_file")
                    .map(|e| PathBuf::from(&e.value))
                    .ok_or_else(|| err("velocity_file", line, "required when initial = file"))?;
                Preset::File {
                    velocity,
                    density: get("density_file").map(|e| PathBuf::from(&e.value)),
                }
            }
            Some((v, line)) => {
                return Err(err(
                    "initial",
                    line,
                    format!("expected taylor_green, oscillatory, random or file, got '{v}'"),
                ))
            }
        };
        c.validate(&|k| entries.get(k).map_or(0, |e| e.line))?;
        Ok(c)
    }

    fn validate(&self, line: &dyn Fn(&str) -> usize) -> Result<(), CliError> {
        let check = |ok: bool, key: &str, msg: String| if ok { Ok(()) } else { Err(err(key, line(key), msg)) };
        check(self.dim == 2 || self.dim == 3, "d", format!("d must be 2 or 3, got {}", self.dim))?;
        check(
            self.n >= 8 && self.n.is_multiple_of(2),
            "n",
            format!("n must be even and at least 8, got {}", self.n),
        )?;
        check(self.mu > 0.0, "mu", format!("mu must be positive, got {}", self.mu))?;
        check(self.nu >= self.mu, "nu", format!("nu must be at least mu, got {}", self.nu))?;
        check(
            self.nu_list.windows(2).all(|w| w[1] > w[0]) && self.nu_list.iter().all(|v| *v >= self.mu),
            "nu_list",
            "nu_list must be strictly increasing with every entry at least mu".into(),
        )?;
        check(self.gamma >= 1.0, "gamma", format!("gamma must be at least 1, got {}", self.gamma))?;
        check(self.p >= 1.0, "p", format!("p must be at least 1, got {}", self.p))?;
        check(self.horizon > 0.0, "horizon", format!("horizon must be positive, got {}", self.horizon))?;
        check(
            self.cfl > 0.0 && self.cfl < 1.0,
            "cfl",
            format!("cfl must lie in (0, 1), got {}", self.cfl),
        )?;
        check(self.dt_max > 0.0, "dt_max", format!("dt_max must be positive, got {}", self.dt_max))?;
        check(
            self.snapshot_stride > 0.0,
            "snapshot_stride",
            format!("snapshot_stride must be positive, got {}", self.snapshot_stride),
        )?;
        check(
            self.layer_ratio > 0.0,
            "layer_ratio",
            format!("layer_ratio must be positive, got {}", self.layer_ratio),
        )?;
        check(
            self.density_amplitude.abs() < 0.9,
            "density_amplitude",
            format!("density_amplitude must be below 0.9 in size, got {}", self.density_amplitude),
        )?;
        if let Preset::Oscillatory { epsilon } = self.preset {
            let k = 1.0 / epsilon;
            check(
                epsilon > 0.0 && k.fract() == 0.0 && 3.0 * k < self.n as f64,
                "epsilon",
                format!("1/epsilon must be an integer below n/3, got epsilon = {epsilon}"),
            )?;
        }
        check(
            self.lemma_trials >= 10,
            "lemma_trials",
            format!("lemma_trials must be at least 10, got {}", self.lemma_trials),
        )?;
        check(
            self.lemma_grids.len() >= 2 && self.lemma_grids.iter().all(|n| *n >= 8 && n % 2 == 0),
            "lemma_grids",
            "lemma_grids needs at least two even sizes of 8 or more".into(),
        )?;
        Ok(())
    }

    pub fn params(&self, nu: f64) -> Result<PhysicalParams, CliError> {
        PhysicalParams::with_nu(self.mu, nu, self.gamma).map_err(CliError::Core)
    }

    pub fn stepper(&self) -> StepperConfig {
        StepperConfig {
            cfl: self.cfl,
            dt_max: self.dt_max,
            snapshot_interval: self.snapshot_stride,
            layer_ratio: self.layer_ratio,
            ..StepperConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = RunConfig::parse("# comment\n\nn = 16  # trailing\nnu_list = 5, 50, 500\ninitial = oscillatory\nepsilon = 0.25\n").unwrap();
        assert_eq!(c.n, 16);
        assert_eq!(c.nu_list, vec![5.0, 50.0, 500.0]);
        assert_eq!(c.preset, Preset::Oscillatory { epsilon: 0.25 });
        assert_eq!(c.mu, 1.0);
        let c = RunConfig::parse("mu = 0.5\nlambda = 3").unwrap();
        assert_eq!(c.nu, 4.0);
    }

    fn key_of(text: &str) -> (String, usize) {
        match RunConfig::parse(text) {
            Err(CliError::Config { key, line, .. }) => (key, line),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(key_of("n = 16\nbogus = 1"), ("bogus".into(), 2));
        assert_eq!(key_of("n = sixteen"), ("n".into(), 1));
        assert_eq!(key_of("n = 15"), ("n".into(), 1));
        assert_eq!(key_of("\ngamma = 0.5"), ("gamma".into(), 2));
        assert_eq!(key_of("nu_list = 10, 5, 20"), ("nu_list".into(), 1));
        assert_eq!(key_of("n = 16\nn = 32"), ("n".into(), 2));
        assert_eq!(key_of("nu = 10\nlambda = 3"), ("lambda".into(), 2));
        assert_eq!(key_of("initial = spiral"), ("initial".into(), 1));
        assert_eq!(key_of("initial = file"), ("velocity_file".into(), 1));
        assert_eq!(key_of("lemmas = bernstein, nope"), ("lemmas".into(), 1));
        assert_eq!(key_of("just text"), ("just text".into(), 1));
    }
}
