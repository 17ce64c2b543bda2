//! Run configuration: built-in defaults, then a flat `key=value` file, then
//! command-line flags. Everything is resolved and checked before any
//! computation starts.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cavspin::broadening::{characteristic_width, BroadeningSpec, Family};
use cavspin::model::SystemParams;
use clap::{Args, ValueEnum};

use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Decay,
    Moments,
    Spectrum,
    StabilitySweep,
    Pole,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Decay => "decay",
            Experiment::Moments => "moments",
            Experiment::Spectrum => "spectrum",
            Experiment::StabilitySweep => "stability-sweep",
            Experiment::Pole => "pole",
        }
    }
}

/// Flags shared by every subcommand. Names double as config-file keys.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Flat key=value file; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV destination; the manifest goes next to it as `<out>.manifest.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of sub-ensembles for broadened lines (odd, at least 3).
    #[arg(long)]
    pub m: Option<usize>,
    /// homogeneous, lorentzian or gaussian.
    #[arg(long)]
    pub family: Option<String>,
    /// Lorentzian FWHM or Gaussian standard deviation.
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub kappa1: Option<f64>,
    #[arg(long)]
    pub kappa2: Option<f64>,
    #[arg(long)]
    pub gamma_perp: Option<f64>,
    #[arg(long)]
    pub g_ens: Option<f64>,
    #[arg(long)]
    pub delta_cs: Option<f64>,
    /// Spin polarization: +1 inverted, -1 ground state.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub t_samples: Option<usize>,
    #[arg(long)]
    pub delta_e_min: Option<f64>,
    #[arg(long)]
    pub delta_e_max: Option<f64>,
    #[arg(long)]
    pub delta_e_samples: Option<usize>,
    /// Total number of spins.
    #[arg(long)]
    pub n_spins: Option<f64>,
    #[arg(long)]
    pub g_ens_min: Option<f64>,
    #[arg(long)]
    pub g_ens_max: Option<f64>,
    #[arg(long)]
    pub kappa_min: Option<f64>,
    #[arg(long)]
    pub kappa_max: Option<f64>,
    /// Points per axis of the stability sweep.
    #[arg(long)]
    pub sweep_samples: Option<usize>,
    /// Read every rate in units of the line's characteristic width and every time in units of its inverse.
    #[arg(long)]
    pub normalize_gamma: bool,
}

const KEYS: &[&str] = &[
    "out",
    "m",
    "family",
    "width",
    "kappa",
    "kappa1",
    "kappa2",
    "gamma-perp",
    "g-ens",
    "delta-cs",
    "p",
    "t-max",
    "t-samples",
    "delta-e-min",
    "delta-e-max",
    "delta-e-samples",
    "n-spins",
    "g-ens-min",
    "g-ens-max",
    "kappa-min",
    "kappa-max",
    "sweep-samples",
    "normalize-gamma",
];

impl Flags {
    /// Flags that were set, as `(key, value)` text.
    fn entries(&self) -> Vec<(&'static str, String)> {
        fn put<T: ToString>(v: &mut Vec<(&'static str, String)>, key: &'static str, value: &Option<T>) {
            if let Some(x) = value {
                v.push((key, x.to_string()));
            }
        }
        let mut v = Vec::new();
        if let Some(out) = &self.out {
            v.push(("out", out.display().to_string()));
        }
        put(&mut v, "m", &self.m);
        put(&mut v, "family", &self.family);
        put(&mut v, "width", &self.width);
        put(&mut v, "kappa", &self.kappa);
        put(&mut v, "kappa1", &self.kappa1);
        put(&mut v, "kappa2", &self.kappa2);
        put(&mut v, "gamma-perp", &self.gamma_perp);
        put(&mut v, "g-ens", &self.g_ens);
        put(&mut v, "delta-cs", &self.delta_cs);
        put(&mut v, "p", &self.p);
        put(&mut v, "t-max", &self.t_max);
        put(&mut v, "t-samples", &self.t_samples);
        put(&mut v, "delta-e-min", &self.delta_e_min);
        put(&mut v, "delta-e-max", &self.delta_e_max);
        put(&mut v, "delta-e-samples", &self.delta_e_samples);
        put(&mut v, "n-spins", &self.n_spins);
        put(&mut v, "g-ens-min", &self.g_ens_min);
        put(&mut v, "g-ens-max", &self.g_ens_max);
        put(&mut v, "kappa-min", &self.kappa_min);
        put(&mut v, "kappa-max", &self.kappa_max);
        put(&mut v, "sweep-samples", &self.sweep_samples);
        if self.normalize_gamma {
            v.push(("normalize-gamma", "true".into()));
        }
        v
    }
}

/// Parses a flat `key = value` file. Blank lines and `#` comments are skipped;
/// underscores in keys are read as hyphens.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, Failure> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Failure::precondition(format!("config line {}: expected key=value, got {line:?}", lineno + 1))
        })?;
        let key = key.trim().to_ascii_lowercase().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(Failure::precondition(format!(
                "config line {}: unknown key {key:?} (known keys: {})",
                lineno + 1,
                KEYS.join(", ")
            )));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Failure::precondition(format!("config line {}: key {key:?} given twice", lineno + 1)));
        }
    }
    Ok(map)
}

/// Fully resolved run, in the units the engines see.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub config_file: Option<PathBuf>,
    pub out: PathBuf,
    pub spec: BroadeningSpec,
    pub m: usize,
    pub params: SystemParams,
    pub p: f64,
    pub n_spins: f64,
    pub t_max: f64,
    pub t_samples: usize,
    pub delta_e: (f64, f64, usize),
    pub sweep_g: (f64, f64),
    pub sweep_kappa: (f64, f64),
    pub sweep_samples: usize,
    pub normalize_gamma: bool,
    /// Characteristic width in the entered units; 1 when rates are not rescaled.
    pub gamma_unit: f64,
}

struct Values {
    map: BTreeMap<String, String>,
}

impl Values {
    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Failure> {
        match self.map.get(key) {
            None => Ok(None),
            Some(text) => text
                .parse()
                .map(Some)
                .map_err(|_| Failure::precondition(format!("cannot parse {key} = {text:?}"))),
        }
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T, Failure> {
        Ok(self.get(key)?.unwrap_or(default))
    }
}

fn default_width(family: Family) -> f64 {
    match family {
        Family::Homogeneous => 0.0,
        // Both give Γ = 1 at γ⊥ = 0.
        Family::Lorentzian => 2.0,
        Family::Gaussian => (0.5 * PI).sqrt(),
    }
}

fn default_t_max(experiment: Experiment) -> f64 {
    match experiment {
        Experiment::Moments => 10.0,
        _ => 5.0,
    }
}

impl RunConfig {
    pub fn resolve(experiment: Experiment, flags: &Flags) -> Result<Self, Failure> {
        let mut map = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::precondition(format!("cannot read config {}: {e}", path.display())))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        for (key, value) in flags.entries() {
            map.insert(key.to_string(), value);
        }
        Self::from_values(experiment, flags.config.clone(), Values { map })
    }

    fn from_values(experiment: Experiment, config_file: Option<PathBuf>, v: Values) -> Result<Self, Failure> {
        let family: Family = match v.map.get("family") {
            Some(name) => name.parse().map_err(|e: cavspin::Error| Failure::precondition(e.to_string()))?,
            None => Family::Gaussian,
        };
        let width = v.or("width", default_width(family))?;
        let gamma_perp = v.or("gamma-perp", 0.0)?;
        let g_ens = v.or("g-ens", 2.0)?;
        let delta_cs = v.or("delta-cs", 0.0)?;
        let (kappa1, kappa2) = match (v.get::<f64>("kappa")?, v.get::<f64>("kappa1")?, v.get::<f64>("kappa2")?) {
            (None, None, None) => (4.0, 4.0),
            (Some(k), None, None) => (0.5 * k, 0.5 * k),
            (Some(k), Some(k1), None) => (k1, k - k1),
            (Some(k), None, Some(k2)) => (k - k2, k2),
            (None, Some(k1), Some(k2)) => (k1, k2),
            (Some(k), Some(k1), Some(k2)) => {
                if (k - k1 - k2).abs() > 1e-12 * k.abs() {
                    return Err(Failure::precondition(format!(
                        "kappa = {k} differs from kappa1 + kappa2 = {}; give two of the three",
                        k1 + k2
                    )));
                }
                (k1, k2)
            }
            _ => {
                return Err(Failure::precondition(
                    "give kappa alone, kappa1 and kappa2, or kappa with one of them".to_string(),
                ))
            }
        };
        let p = v.or("p", 1.0)?;
        let n_spins = v.or("n-spins", 1e6)?;
        let normalize_gamma = v.or("normalize-gamma", false)?;

        let raw_spec = BroadeningSpec::new(family, width)?;
        let gamma_unit = if normalize_gamma {
            let gamma = characteristic_width(&raw_spec, gamma_perp)?;
            if !(gamma.is_finite() && gamma > 0.0) {
                return Err(Failure::precondition(format!(
                    "--normalize-gamma needs a positive characteristic width (got {gamma}); \
                     a homogeneous line needs gamma-perp > 0"
                )));
            }
            gamma
        } else {
            1.0
        };
        // Rates are divided by Γ and times multiplied by it, so the engines run at Γ = 1.
        let r = |x: f64| x / gamma_unit;
        let spec = BroadeningSpec::new(family, r(width))?;
        let params = SystemParams::new(r(kappa1), r(kappa2), r(gamma_perp), r(g_ens), r(delta_cs))?;

        let m = if family == Family::Homogeneous { 1 } else { v.or("m", 601)? };
        let t_max = match v.get::<f64>("t-max")? {
            Some(t) => t * gamma_unit,
            None => default_t_max(experiment),
        };
        let t_samples = v.or("t-samples", 101)?;
        let delta_e = (
            r(v.or("delta-e-min", -5.0)?),
            r(v.or("delta-e-max", 5.0)?),
            v.or("delta-e-samples", 201)?,
        );
        let sweep_g = (r(v.or("g-ens-min", 0.2)?), r(v.or("g-ens-max", 4.0)?));
        let sweep_kappa = (r(v.or("kappa-min", 0.5)?), r(v.or("kappa-max", 10.0)?));
        let sweep_samples = v.or("sweep-samples", 12)?;
        let out = v.get::<String>("out")?.map(PathBuf::from).unwrap_or_else(|| PathBuf::from(format!("{}.csv", experiment.name())));

        let cfg = Self {
            experiment,
            config_file,
            out,
            spec,
            m,
            params,
            p,
            n_spins,
            t_max,
            t_samples,
            delta_e,
            sweep_g,
            sweep_kappa,
            sweep_samples,
            normalize_gamma,
            gamma_unit,
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), Failure> {
        let pre = |msg: String| Err(Failure::precondition(msg));
        if !(self.n_spins.is_finite() && self.n_spins > 0.0) {
            return pre(format!("n-spins must be positive (got {})", self.n_spins));
        }
        if !(self.p.is_finite() && (-1.0..=1.0).contains(&self.p)) {
            return pre(format!("p must lie in [-1, 1] (got {})", self.p));
        }
        let needs_sign = !matches!(self.experiment, Experiment::Spectrum);
        if needs_sign && self.p != 1.0 && self.p != -1.0 {
            return pre(format!(
                "{} needs p = +1 or -1 (got {}); fractional polarization is only offered for spectrum",
                self.experiment.name(),
                self.p
            ));
        }
        if self.spec.family() != Family::Homogeneous && (self.m < 3 || self.m % 2 == 0) {
            return pre(format!("m must be odd and at least 3 for a broadened line (got {})", self.m));
        }
        if matches!(self.experiment, Experiment::Decay | Experiment::Moments) {
            if !(self.t_max.is_finite() && self.t_max > 0.0) {
                return pre(format!("t-max must be positive (got {})", self.t_max));
            }
            if self.t_samples < 2 {
                return pre(format!("t-samples must be at least 2 (got {})", self.t_samples));
            }
        }
        if self.experiment == Experiment::Spectrum {
            let (lo, hi, n) = self.delta_e;
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) || n < 1 || (n == 1 && lo != hi) {
                return pre(format!(
                    "detuning grid needs finite delta-e-min <= delta-e-max and samples >= 1 (got {lo}, {hi}, {n})"
                ));
            }
        }
        if self.experiment == Experiment::StabilitySweep {
            let (g0, g1) = self.sweep_g;
            let (k0, k1) = self.sweep_kappa;
            if !(g0 >= 0.0 && g0 <= g1 && g1.is_finite()) {
                return pre(format!("g-ens range must satisfy 0 <= min <= max (got {g0}, {g1})"));
            }
            if !(k0 > 0.0 && k0 <= k1 && k1.is_finite()) {
                return pre(format!("kappa range must satisfy 0 < min <= max (got {k0}, {k1})"));
            }
            if self.sweep_samples < 1 {
                return pre("sweep-samples must be at least 1".to_string());
            }
        }
        if self.experiment == Experiment::Pole && self.spec.family() != Family::Gaussian {
            return pre(format!(
                "pole needs a Gaussian line (got {}); other lines have closed-form eigenvalues",
                self.spec.family().name()
            ));
        }
        if self.out.as_os_str().is_empty() {
            return pre("out path is empty".to_string());
        }
        let parent = self.out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return pre(format!("output directory {} does not exist", parent.display()));
        }
        Ok(())
    }

    /// Every resolved parameter, in the order written to the CSV header.
    pub fn echo(&self) -> Vec<(String, String)> {
        let f = crate::output::fmt_f64;
        let mut v: Vec<(String, String)> = vec![
            ("experiment".into(), self.experiment.name().into()),
            ("family".into(), self.spec.family().name().into()),
            ("width".into(), f(self.spec.width())),
            ("m".into(), self.m.to_string()),
            ("kappa".into(), f(self.params.kappa)),
            ("kappa1".into(), f(self.params.kappa1)),
            ("kappa2".into(), f(self.params.kappa2)),
            ("gamma_perp".into(), f(self.params.gamma_perp)),
            ("g_ens".into(), f(self.params.g_ens)),
            ("delta_cs".into(), f(self.params.delta_cs)),
            ("p".into(), f(self.p)),
            ("n_spins".into(), f(self.n_spins)),
            ("normalize_gamma".into(), self.normalize_gamma.to_string()),
            ("gamma_unit".into(), f(self.gamma_unit)),
        ];
        match self.experiment {
            Experiment::Decay | Experiment::Moments => {
                v.push(("t_max".into(), f(self.t_max)));
                v.push(("t_samples".into(), self.t_samples.to_string()));
            }
            Experiment::Spectrum => {
                v.push(("delta_e_min".into(), f(self.delta_e.0)));
                v.push(("delta_e_max".into(), f(self.delta_e.1)));
                v.push(("delta_e_samples".into(), self.delta_e.2.to_string()));
            }
            Experiment::StabilitySweep => {
                v.push(("g_ens_min".into(), f(self.sweep_g.0)));
                v.push(("g_ens_max".into(), f(self.sweep_g.1)));
                v.push(("kappa_min".into(), f(self.sweep_kappa.0)));
                v.push(("kappa_max".into(), f(self.sweep_kappa.1)));
                v.push(("sweep_samples".into(), self.sweep_samples.to_string()));
            }
            Experiment::Pole => {}
        }
        v
    }
}
