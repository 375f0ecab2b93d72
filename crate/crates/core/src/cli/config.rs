//! Flat `key=value` run configuration. `#` starts a comment; relative paths
//! resolve against the directory holding the config file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Result, SnsError};
use crate::noise::RenormWeight;
use crate::solver::{InitialCondition, SolverConfig, ZetaSpec};

pub const KEYS: &[&str] = &[
    "n",
    "dt",
    "t_end",
    "kappa",
    "a",
    "seed",
    "zeta.mode",
    "zeta.sigma",
    "zeta.theta",
    "zeta.path",
    "ceiling",
    "out_dir",
    "dealias",
    "noise",
    "noise_substeps",
    "u0.mode",
    "u0.norm",
    "u0.decay",
    "u0.amplitude",
    "u0.path",
    "cadence",
    "monitor",
    "snapshot_every",
    "renorm.weight",
];

fn err(line: usize, msg: impl Into<String>) -> SnsError {
    SnsError::Config { line, msg: msg.into() }
}

fn num<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| err(line, format!("{key}: cannot parse '{v}'")))
}

fn switch(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        _ => Err(err(line, format!("{key}: expected on/off, got '{v}'"))),
    }
}

#[derive(Default)]
struct Raw {
    entries: Vec<(usize, String, String)>,
}

impl Raw {
    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.entries
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(l, _, v)| (*l, v.as_str()))
    }
}

fn tokenize(text: &str) -> Result<Raw> {
    let mut raw = Raw::default();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| err(no, format!("expected key=value, got '{body}'")))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(err(no, format!("unknown key '{k}'")));
        }
        if v.is_empty() {
            return Err(err(no, format!("{k}: empty value")));
        }
        if !seen.insert(k.to_string()) {
            return Err(err(no, format!("duplicate key '{k}'")));
        }
        raw.entries.push((no, k.to_string(), v.to_string()));
    }
    Ok(raw)
}

fn resolve(base: &Path, v: &str) -> PathBuf {
    let p = PathBuf::from(v);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

/// Parses config text; `base` anchors relative paths.
pub fn parse_config(text: &str, base: &Path) -> Result<SolverConfig> {
    let raw = tokenize(text)?;
    let last = text.lines().count().max(1);
    let (_, n) = raw.get("n").ok_or_else(|| err(last, "missing required key 'n'"))?;
    let (_, seed) = raw.get("seed").ok_or_else(|| err(last, "missing required key 'seed'"))?;
    let n_line = raw.get("n").unwrap().0;
    let seed_line = raw.get("seed").unwrap().0;
    let mut cfg = SolverConfig::new(num(n_line, "n", n)?, num(seed_line, "seed", seed)?);

    for (line, key, v) in &raw.entries {
        let (line, v) = (*line, v.as_str());
        match key.as_str() {
            "dt" => cfg.dt = num(line, key, v)?,
            "t_end" => cfg.t_end = num(line, key, v)?,
            "kappa" => cfg.kappa = num(line, key, v)?,
            "a" => cfg.a = num(line, key, v)?,
            "ceiling" => cfg.ceiling = num(line, key, v)?,
            "out_dir" => cfg.out_dir = resolve(base, v),
            "dealias" => cfg.dealias = switch(line, key, v)?,
            "noise" => cfg.noise = switch(line, key, v)?,
            "monitor" => cfg.monitor = switch(line, key, v)?,
            "noise_substeps" => cfg.noise_substeps = num(line, key, v)?,
            "cadence" => cfg.cadence = num(line, key, v)?,
            "snapshot_every" => cfg.snapshot_every = num(line, key, v)?,
            "renorm.weight" => {
                cfg.renorm_weight = match v {
                    "squared" => RenormWeight::Squared,
                    "linear" => RenormWeight::Linear,
                    _ => return Err(err(line, format!("renorm.weight: expected squared/linear, got '{v}'"))),
                }
            }
            _ => {}
        }
    }

    let get_f = |key: &str, default: f64| -> Result<f64> {
        match raw.get(key) {
            Some((l, v)) => num(l, key, v),
            None => Ok(default),
        }
    };
    let zeta_keys = ["zeta.sigma", "zeta.theta", "zeta.path"];
    cfg.zeta = match raw.get("zeta.mode") {
        None | Some((_, "off")) => {
            if let Some(k) = zeta_keys.iter().find(|k| raw.get(k).is_some()) {
                return Err(err(raw.get(k).unwrap().0, format!("{k} requires zeta.mode=spectral or deterministic")));
            }
            ZetaSpec::Off
        }
        Some((_, "spectral")) => ZetaSpec::Spectral {
            sigma: get_f("zeta.sigma", 1.0)?,
            theta: get_f("zeta.theta", 0.5)?,
        },
        Some((l, "deterministic")) => match raw.get("zeta.path") {
            Some((_, p)) => ZetaSpec::Deterministic(resolve(base, p)),
            None => return Err(err(l, "zeta.mode=deterministic requires zeta.path")),
        },
        Some((l, other)) => return Err(err(l, format!("zeta.mode: expected off/spectral/deterministic, got '{other}'"))),
    };

    cfg.u0 = match raw.get("u0.mode") {
        None => cfg.u0,
        Some((_, "zero")) => InitialCondition::Zero,
        Some((_, "shear")) => InitialCondition::Shear {
            amplitude: get_f("u0.amplitude", 1.0)?,
        },
        Some((_, "random")) => InitialCondition::Random {
            norm: get_f("u0.norm", 0.5)?,
            decay: get_f("u0.decay", 3.0)?,
        },
        Some((l, "file")) => {
            let (pl, p) = raw.get("u0.path").ok_or_else(|| err(l, "u0.mode=file requires u0.path"))?;
            let path = resolve(base, p);
            let file = std::fs::File::open(&path).map_err(|e| err(pl, format!("u0.path {}: {e}", path.display())))?;
            let f = crate::spectral::snapshot::read_snapshot(file).map_err(|e| err(pl, format!("u0.path: {e}")))?;
            InitialCondition::Field(f)
        }
        Some((l, other)) => return Err(err(l, format!("u0.mode: expected zero/shear/random/file, got '{other}'"))),
    };
    if raw.get("u0.mode").is_none() {
        if let InitialCondition::Random { norm, decay } = cfg.u0 {
            cfg.u0 = InitialCondition::Random {
                norm: get_f("u0.norm", norm)?,
                decay: get_f("u0.decay", decay)?,
            };
        }
    }

    if cfg.out_dir.is_relative() {
        cfg.out_dir = base.join(&cfg.out_dir);
    }
    cfg.validate().map_err(|e| {
        let msg = e.to_string();
        let line = KEYS
            .iter()
            .filter_map(|k| raw.get(k).filter(|_| msg.contains(&format!("{k}="))).map(|(l, _)| l))
            .next()
            .unwrap_or(last);
        err(line, msg)
    })?;
    Ok(cfg)
}

/// Reads and parses a config file; I/O failures name the path.
pub fn load_config(path: &Path) -> Result<SolverConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SnsError::InvalidArgument(format!("cannot read config {}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(&text, &base)
}

/// Canonical `key=value` text of a config.
pub fn echo_text(cfg: &SolverConfig) -> String {
    cfg.echo().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(t: &str) -> Result<SolverConfig> {
        parse_config(t, Path::new("/base"))
    }

    fn line_of(e: SnsError) -> usize {
        match e {
            SnsError::Config { line, .. } => line,
            other => panic!("{other}"),
        }
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse("n = 32\nseed=3 # comment\n").unwrap();
        assert_eq!((c.n, c.seed, c.dt, c.t_end), (32, 3, 5e-4, 2.0));
        assert!(matches!(c.zeta, ZetaSpec::Off));
        assert_eq!(c.out_dir, PathBuf::from("/base/run"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of(parse("n=32\nseed=1\n\nbogus=2\n").unwrap_err()), 4);
        assert_eq!(line_of(parse("n=32\nseed=1\ndt=abc\n").unwrap_err()), 3);
        assert_eq!(line_of(parse("n=32\nseed=1\nn=16\n").unwrap_err()), 3);
        assert_eq!(line_of(parse("n=32\nno equals\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("n=32\nseed=1\na=5\n").unwrap_err()), 3);
        assert_eq!(line_of(parse("n=32\nseed=1\nzeta.sigma=2\n").unwrap_err()), 3);
        assert!(parse("n=32\n").is_err());
    }

    #[test]
    fn zeta_and_initial_modes() {
        let c = parse("n=32\nseed=1\nzeta.mode=spectral\nzeta.theta=1\nu0.mode=shear\nu0.amplitude=2\n").unwrap();
        assert!(matches!(c.zeta, ZetaSpec::Spectral { sigma, theta } if sigma == 1.0 && theta == 1.0));
        assert!(matches!(c.u0, InitialCondition::Shear { amplitude } if amplitude == 2.0));
        let c = parse("n=32\nseed=1\nu0.norm=2\n").unwrap();
        assert!(matches!(c.u0, InitialCondition::Random { norm, .. } if norm == 2.0));
    }

    #[test]
    fn echo_roundtrips() {
        let c = parse("n=32\nseed=9\ndt=0.001\nzeta.mode=spectral\nmonitor=off\nout_dir=/tmp/x\n").unwrap();
        let again = parse(&echo_text(&c)).unwrap();
        assert_eq!(echo_text(&c), echo_text(&again));
    }
}
