//! Plain `key = value` run configuration with strict parsing: unknown keys,
//! duplicates, and out-of-range values are rejected with line numbers, and
//! every accepted config round-trips through a canonical dump.

use anyhow::{anyhow, bail, Result};
use mhdv_core::ic::IcDescriptor;
use mhdv_core::stepper::{DtSpec, SimParams};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SimParams,
    pub output_dir: PathBuf,
    /// Field-snapshot cadence in steps; absent = disabled.
    pub snapshot_interval: Option<u64>,
    pub diag_interval: u64,
    /// Restart-checkpoint cadence in steps; absent = disabled.
    pub checkpoint_interval: Option<u64>,
    /// Extra H^s monitor indices beyond the fixed CSV set {2, 3}.
    pub hs_monitor_set: Vec<f64>,
}

const KNOWN_KEYS: &[&str] = &[
    "n",
    "alpha",
    "mu",
    "nu",
    "dt",
    "dt_max",
    "t_end",
    "cfl_safety",
    "integrating_factor",
    "smoothness_horizon",
    "ic",
    "ic_amp_u",
    "ic_amp_b",
    "ic_k0",
    "seed",
    "output_dir",
    "snapshot_interval",
    "diag_interval",
    "checkpoint_interval",
    "hs_monitor_set",
];

const REQUIRED_KEYS: &[&str] = &["n", "alpha", "mu", "t_end", "ic"];

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut seen: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {lineno}: expected 'key = value', got '{line}'"))?;
        let key = key.trim();
        let value = value.trim();
        if !KNOWN_KEYS.contains(&key) {
            bail!("line {lineno}: unknown key '{key}'");
        }
        if let Some((first, _)) = seen.get(key) {
            bail!("duplicate key '{key}' (lines {first} and {lineno})");
        }
        seen.insert(key.to_string(), (lineno, value.to_string()));
    }

    for req in REQUIRED_KEYS {
        if !seen.contains_key(*req) {
            bail!("missing required key '{req}'");
        }
    }

    let get = |key: &str| seen.get(key).map(|(l, v)| (*l, v.as_str()));
    let parse_f64 = |key: &str| -> Result<Option<f64>> {
        match get(key) {
            None => Ok(None),
            Some((l, v)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| anyhow!("line {l}: {key}: expected a number, got '{v}'")),
        }
    };
    let parse_u64 = |key: &str| -> Result<Option<u64>> {
        match get(key) {
            None => Ok(None),
            Some((l, v)) => v
                .parse::<u64>()
                .map(Some)
                .map_err(|_| anyhow!("line {l}: {key}: expected a nonnegative integer, got '{v}'")),
        }
    };

    let n = match get("n") {
        Some((l, v)) => v
            .parse::<usize>()
            .map_err(|_| anyhow!("line {l}: n: expected an integer, got '{v}'"))?,
        None => unreachable!(),
    };
    let dt = match get("dt") {
        None => DtSpec::Auto,
        Some((_, "auto")) => DtSpec::Auto,
        Some((l, v)) => DtSpec::Fixed(
            v.parse::<f64>()
                .map_err(|_| anyhow!("line {l}: dt: expected a number or 'auto', got '{v}'"))?,
        ),
    };
    let integrating_factor = match get("integrating_factor") {
        None => true,
        Some((l, v)) => match v {
            "true" => true,
            "false" => false,
            _ => bail!("line {l}: integrating_factor: expected true or false, got '{v}'"),
        },
    };
    let ic_kinds = match get("ic") {
        Some((l, v)) => IcDescriptor::parse_kinds(v).map_err(|e| anyhow!("line {l}: ic: {e}"))?,
        None => unreachable!(),
    };
    let mut ic = IcDescriptor::new(ic_kinds);
    if let Some(v) = parse_f64("ic_amp_u")? {
        ic.amp_u = v;
    }
    if let Some(v) = parse_f64("ic_amp_b")? {
        ic.amp_b = v;
    }
    if let Some(v) = parse_f64("ic_k0")? {
        ic.k0 = v;
    }

    let params = SimParams {
        alpha: parse_f64("alpha")?.expect("required"),
        mu: parse_f64("mu")?.expect("required"),
        nu: parse_f64("nu")?.unwrap_or(0.0),
        n,
        dt,
        dt_max: parse_f64("dt_max")?.unwrap_or(0.05),
        t_end: parse_f64("t_end")?.expect("required"),
        cfl_safety: parse_f64("cfl_safety")?.unwrap_or(0.5),
        integrating_factor,
        smoothness_horizon: parse_f64("smoothness_horizon")?,
        ic,
        seed: parse_u64("seed")?.unwrap_or(0),
    };
    params.validate()?;

    let interval = |key: &str| -> Result<Option<u64>> {
        match parse_u64(key)? {
            None => Ok(None),
            Some(0) => {
                let (l, _) = get(key).unwrap();
                bail!("line {l}: {key}: intervals must be >= 1 (omit the key to disable)")
            }
            Some(v) => Ok(Some(v)),
        }
    };
    let diag_interval = interval("diag_interval")?.unwrap_or(1);
    let snapshot_interval = interval("snapshot_interval")?;
    let checkpoint_interval = interval("checkpoint_interval")?;

    let hs_monitor_set = match get("hs_monitor_set") {
        None => Vec::new(),
        Some((l, v)) => v
            .split(',')
            .map(|s| {
                let s = s.trim();
                let val: f64 = s
                    .parse()
                    .map_err(|_| anyhow!("line {l}: hs_monitor_set: bad entry '{s}'"))?;
                if val < 0.0 {
                    bail!("line {l}: hs_monitor_set: indices must be >= 0");
                }
                Ok(val)
            })
            .collect::<Result<Vec<f64>>>()?,
    };

    let output_dir = PathBuf::from(get("output_dir").map(|(_, v)| v).unwrap_or("out"));

    Ok(RunConfig {
        params,
        output_dir,
        snapshot_interval,
        diag_interval,
        checkpoint_interval,
        hs_monitor_set,
    })
}

impl RunConfig {
    /// Canonical dump: every effective setting, one per line, parseable back
    /// into an equivalent config.
    pub fn dump(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push("n", p.n.to_string());
        push("alpha", p.alpha.to_string());
        push("mu", p.mu.to_string());
        push("nu", p.nu.to_string());
        match p.dt {
            DtSpec::Auto => push("dt", "auto".into()),
            DtSpec::Fixed(dt) => push("dt", dt.to_string()),
        }
        push("dt_max", p.dt_max.to_string());
        push("t_end", p.t_end.to_string());
        push("cfl_safety", p.cfl_safety.to_string());
        push("integrating_factor", p.integrating_factor.to_string());
        if let Some(h) = p.smoothness_horizon {
            push("smoothness_horizon", h.to_string());
        }
        push("ic", p.ic.kinds_string());
        push("ic_amp_u", p.ic.amp_u.to_string());
        push("ic_amp_b", p.ic.amp_b.to_string());
        push("ic_k0", p.ic.k0.to_string());
        push("seed", p.seed.to_string());
        push("output_dir", self.output_dir.display().to_string());
        push("diag_interval", self.diag_interval.to_string());
        if let Some(v) = self.snapshot_interval {
            push("snapshot_interval", v.to_string());
        }
        if let Some(v) = self.checkpoint_interval {
            push("checkpoint_interval", v.to_string());
        }
        if !self.hs_monitor_set.is_empty() {
            let list =
                self.hs_monitor_set.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
            push("hs_monitor_set", list);
        }
        out
    }
}
