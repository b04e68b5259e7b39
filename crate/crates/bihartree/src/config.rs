//! Run configuration: flat `key = value` text with `#` comments, full
//! validation, canonical dumps, and `--set` overrides. The config file
//! doubles as the experiment record, so every knob lives here and unknown
//! keys are rejected rather than ignored.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::exponents::ModelParams;

/// Initial-condition family.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Gaussian {
        amplitude: f64,
        width: f64,
        center: Vec<f64>,
        velocity: Vec<f64>,
    },
    GroundStateScaled {
        lambda: f64,
        perturbation: f64,
    },
    File {
        path: String,
    },
}

/// Full experiment configuration (binary64; this is an I/O artifact).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams<f64>,
    pub d: usize,
    pub l: f64,
    pub m: usize,
    pub dt: f64,
    pub t_final: f64,
    pub cadence: usize,
    pub dealias: bool,
    pub sigma: f64,
    pub r_diag: f64,
    pub linear_only: bool,
    pub defocusing: bool,
    pub initial: InitialSpec,
    pub outdir: String,
    pub checkpoint_interval: usize,
    pub seed: u64,
    pub gs_tol: f64,
    pub gs_max_iter: usize,
    pub gs_seed_amplitude: f64,
    pub gs_seed_width: f64,
    pub scatter_threshold_rel: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let d = 3;
        let l = 40.0;
        Self {
            params: ModelParams {
                n: 3,
                alpha: 2.0,
                b: -1.0,
                p: 2.5,
            },
            d,
            l,
            m: 64,
            dt: 1e-3,
            t_final: 1.0,
            cadence: 10,
            dealias: true,
            sigma: 0.5,
            r_diag: l / 8.0,
            linear_only: false,
            defocusing: false,
            initial: InitialSpec::Gaussian {
                amplitude: 1.0,
                width: 2.0,
                center: vec![0.0; d],
                velocity: vec![0.0; d],
            },
            outdir: "out".into(),
            checkpoint_interval: 0,
            seed: 0,
            gs_tol: 1e-8,
            gs_max_iter: 500,
            gs_seed_amplitude: 1.0,
            gs_seed_width: 3.0,
            scatter_threshold_rel: 1e-3,
        }
    }
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str, start_line: usize) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = start_line + i + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigParse {
                line: line_no,
                message: format!("expected `key = value`, got `{}`", line),
            })?;
            map.insert(
                key.trim().to_string(),
                (line_no, value.trim().to_string()),
            );
        }
        Ok(Self { map })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn reject_unknown(self) -> Result<()> {
        if let Some((key, (line, _))) = self.map.into_iter().next() {
            return Err(Error::ConfigParse {
                line,
                message: format!("unknown key `{}`", key),
            });
        }
        Ok(())
    }
}

fn parse_scalar<V: std::str::FromStr>(key: &str, line: usize, value: &str) -> Result<V> {
    value.parse().map_err(|_| Error::ConfigParse {
        line,
        message: format!("cannot parse `{}` as value for `{}`", value, key),
    })
}

fn parse_bool(key: &str, line: usize, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "1" => Ok(true),
        "false" | "off" | "0" => Ok(false),
        _ => Err(Error::ConfigParse {
            line,
            message: format!("cannot parse `{}` as boolean for `{}`", value, key),
        }),
    }
}

fn parse_vector(key: &str, line: usize, value: &str, d: usize) -> Result<Vec<f64>> {
    let parts: std::result::Result<Vec<f64>, _> =
        value.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let v = parts.map_err(|_| Error::ConfigParse {
        line,
        message: format!("cannot parse `{}` as a comma-separated vector for `{}`", value, key),
    })?;
    if v.len() != d {
        return Err(Error::ConfigValidation(format!(
            "`{}` must have {} components, got {}",
            key,
            d,
            v.len()
        )));
    }
    Ok(v)
}

impl RunConfig {
    /// Parse a config file and apply `--set key=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut text = String::new();
        if let Some(p) = path {
            text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        }
        let file_lines = text.lines().count();
        let mut override_text = String::new();
        for o in overrides {
            override_text.push_str(o);
            override_text.push('\n');
        }
        let mut entries = Entries::parse(&text, 0)?;
        let over = Entries::parse(&override_text, file_lines)?;
        for (k, v) in over.map {
            entries.map.insert(k, v);
        }
        Self::from_entries(entries)
    }

    fn from_entries(mut e: Entries) -> Result<Self> {
        let mut cfg = RunConfig::default();
        macro_rules! scalar {
            ($key:literal, $field:expr) => {
                if let Some((line, v)) = e.take($key) {
                    $field = parse_scalar($key, line, &v)?;
                }
            };
        }
        macro_rules! boolean {
            ($key:literal, $field:expr) => {
                if let Some((line, v)) = e.take($key) {
                    $field = parse_bool($key, line, &v)?;
                }
            };
        }

        scalar!("N", cfg.params.n);
        scalar!("alpha", cfg.params.alpha);
        scalar!("b", cfg.params.b);
        scalar!("p", cfg.params.p);
        scalar!("d", cfg.d);
        let had_l = e.map.contains_key("L");
        scalar!("L", cfg.l);
        scalar!("M", cfg.m);
        scalar!("dt", cfg.dt);
        scalar!("T", cfg.t_final);
        scalar!("cadence", cfg.cadence);
        boolean!("dealias", cfg.dealias);
        scalar!("sigma", cfg.sigma);
        if had_l {
            cfg.r_diag = cfg.l / 8.0;
        }
        scalar!("R_diag", cfg.r_diag);
        boolean!("linear_only", cfg.linear_only);
        boolean!("defocusing", cfg.defocusing);
        scalar!("outdir", cfg.outdir);
        scalar!("checkpoint_interval", cfg.checkpoint_interval);
        scalar!("seed", cfg.seed);
        scalar!("gs_tol", cfg.gs_tol);
        scalar!("gs_max_iter", cfg.gs_max_iter);
        scalar!("gs_seed_amplitude", cfg.gs_seed_amplitude);
        scalar!("gs_seed_width", cfg.gs_seed_width);
        scalar!("scatter_threshold_rel", cfg.scatter_threshold_rel);

        let family = e.take("initial");
        let mut amplitude = 1.0;
        let mut width = 2.0;
        let mut center = vec![0.0; cfg.d];
        let mut velocity = vec![0.0; cfg.d];
        let mut lambda = 0.5;
        let mut perturbation = 0.0;
        let mut file = String::new();
        if let Some((line, v)) = e.take("amplitude") {
            amplitude = parse_scalar("amplitude", line, &v)?;
        }
        if let Some((line, v)) = e.take("width") {
            width = parse_scalar("width", line, &v)?;
        }
        if let Some((line, v)) = e.take("center") {
            center = parse_vector("center", line, &v, cfg.d)?;
        }
        if let Some((line, v)) = e.take("velocity") {
            velocity = parse_vector("velocity", line, &v, cfg.d)?;
        }
        if let Some((line, v)) = e.take("lambda") {
            lambda = parse_scalar("lambda", line, &v)?;
        }
        if let Some((line, v)) = e.take("perturbation") {
            perturbation = parse_scalar("perturbation", line, &v)?;
        }
        if let Some((_, v)) = e.take("file") {
            file = v;
        }
        cfg.initial = match family.as_ref().map(|(_, v)| v.as_str()) {
            None | Some("gaussian") => InitialSpec::Gaussian {
                amplitude,
                width,
                center,
                velocity,
            },
            Some("groundstate-scaled") => InitialSpec::GroundStateScaled {
                lambda,
                perturbation,
            },
            Some("file") => InitialSpec::File { path: file },
            Some(other) => {
                return Err(Error::ConfigValidation(format!(
                    "unknown initial-condition family `{}` (expected gaussian, groundstate-scaled, or file)",
                    other
                )))
            }
        };
        e.reject_unknown()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.params
            .validate()
            .map_err(|e| Error::ConfigValidation(e.to_string()))?;
        if !(1..=3).contains(&self.d) {
            return Err(Error::ConfigValidation(format!(
                "d = {} must be 1, 2, or 3",
                self.d
            )));
        }
        if self.m < 8 || self.m % 2 != 0 {
            return Err(Error::ConfigValidation(format!(
                "M = {} must be an even integer >= 8",
                self.m
            )));
        }
        if !(self.l > 0.0) {
            return Err(Error::ConfigValidation("L must be positive".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::ConfigValidation("dt must be positive".into()));
        }
        if self.t_final < 0.0 {
            return Err(Error::ConfigValidation("T must be nonnegative".into()));
        }
        if self.cadence == 0 {
            return Err(Error::ConfigValidation("cadence must be >= 1".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::ConfigValidation("sigma must be positive".into()));
        }
        if !(self.r_diag > 0.0) {
            return Err(Error::ConfigValidation("R_diag must be positive".into()));
        }
        if !(self.gs_tol > 0.0) || self.gs_max_iter == 0 {
            return Err(Error::ConfigValidation(
                "ground-state solver needs gs_tol > 0 and gs_max_iter >= 1".into(),
            ));
        }
        match &self.initial {
            InitialSpec::Gaussian {
                width,
                center,
                velocity,
                ..
            } => {
                if !(*width > 0.0) {
                    return Err(Error::ConfigValidation("width must be positive".into()));
                }
                if center.len() != self.d || velocity.len() != self.d {
                    return Err(Error::ConfigValidation(format!(
                        "center and velocity must have d = {} components",
                        self.d
                    )));
                }
            }
            InitialSpec::GroundStateScaled { lambda, perturbation } => {
                if !(*lambda != 0.0) {
                    return Err(Error::ConfigValidation("lambda must be nonzero".into()));
                }
                if *perturbation < 0.0 {
                    return Err(Error::ConfigValidation(
                        "perturbation must be nonnegative".into(),
                    ));
                }
            }
            InitialSpec::File { path } => {
                if path.is_empty() {
                    return Err(Error::ConfigValidation(
                        "initial = file requires a `file` path".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Canonical text form: fixed key order, minimal round-trip float
    /// formatting. `load(dump(cfg))` reproduces `cfg` exactly and dumping is
    /// idempotent.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push("N", self.params.n.to_string());
        push("alpha", fmt_f64(self.params.alpha));
        push("b", fmt_f64(self.params.b));
        push("p", fmt_f64(self.params.p));
        push("d", self.d.to_string());
        push("L", fmt_f64(self.l));
        push("M", self.m.to_string());
        push("dt", fmt_f64(self.dt));
        push("T", fmt_f64(self.t_final));
        push("cadence", self.cadence.to_string());
        push("dealias", self.dealias.to_string());
        push("sigma", fmt_f64(self.sigma));
        push("R_diag", fmt_f64(self.r_diag));
        push("linear_only", self.linear_only.to_string());
        push("defocusing", self.defocusing.to_string());
        match &self.initial {
            InitialSpec::Gaussian {
                amplitude,
                width,
                center,
                velocity,
            } => {
                push("initial", "gaussian".into());
                push("amplitude", fmt_f64(*amplitude));
                push("width", fmt_f64(*width));
                push("center", join_vec(center));
                push("velocity", join_vec(velocity));
            }
            InitialSpec::GroundStateScaled { lambda, perturbation } => {
                push("initial", "groundstate-scaled".into());
                push("lambda", fmt_f64(*lambda));
                push("perturbation", fmt_f64(*perturbation));
            }
            InitialSpec::File { path } => {
                push("initial", "file".into());
                push("file", path.clone());
            }
        }
        push("outdir", self.outdir.clone());
        push("checkpoint_interval", self.checkpoint_interval.to_string());
        push("seed", self.seed.to_string());
        push("gs_tol", fmt_f64(self.gs_tol));
        push("gs_max_iter", self.gs_max_iter.to_string());
        push("gs_seed_amplitude", fmt_f64(self.gs_seed_amplitude));
        push("gs_seed_width", fmt_f64(self.gs_seed_width));
        push("scatter_threshold_rel", fmt_f64(self.scatter_threshold_rel));
        out
    }
}

fn fmt_f64(x: f64) -> String {
    // `{}` on f64 is the shortest representation that round-trips
    format!("{}", x)
}

fn join_vec(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",")
}
