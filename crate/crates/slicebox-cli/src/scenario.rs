//! Scenario files: plain `key = value` text describing one benchmark run,
//! one shipped file per benchmark figure.

use anyhow::{anyhow, bail, Result};

#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub name: String,
    /// Builtin target name or `expr:<density text>`.
    pub target: String,
    /// Sampler methods to run, in order.
    pub methods: Vec<String>,
    pub x0: f64,
    pub n: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub a: f64,
    pub width: f64,
    pub bounds: Option<(f64, f64)>,
    pub bins: usize,
    pub threshold: Option<f64>,
    /// Builtin name whose reference CDF the draws are KS-tested against.
    pub reference: Option<String>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            name: String::new(),
            target: String::new(),
            methods: Vec::new(),
            x0: 1.0,
            n: 10_000,
            burn_in: 100,
            thin: 1,
            seed: 1,
            a: 100.0,
            width: 1.0,
            bounds: None,
            bins: 50,
            threshold: None,
            reference: None,
        }
    }
}

pub const BUILTIN_SCENARIOS: [(&str, &str); 6] = [
    ("fig2a", include_str!("../scenarios/fig2a.scn")),
    ("fig2b", include_str!("../scenarios/fig2b.scn")),
    ("fig2c", include_str!("../scenarios/fig2c.scn")),
    ("fig3a", include_str!("../scenarios/fig3a.scn")),
    ("fig3b", include_str!("../scenarios/fig3b.scn")),
    ("fig4", include_str!("../scenarios/fig4.scn")),
];

pub fn builtin_scenario(name: &str) -> Option<&'static str> {
    BUILTIN_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

pub fn builtin_names() -> String {
    BUILTIN_SCENARIOS
        .iter()
        .map(|(n, _)| *n)
        .collect::<Vec<_>>()
        .join(", ")
}

impl ScenarioSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = ScenarioSpec::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |e: &str| anyhow!("scenario line {}: {e}", lineno + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at("expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>()
                    .map_err(|_| at(&format!("`{v}` is not a number")))
            };
            match key {
                "name" => spec.name = value.to_string(),
                "target" => spec.target = value.to_string(),
                "methods" => {
                    spec.methods = value
                        .split(',')
                        .map(|m| m.trim().to_string())
                        .filter(|m| !m.is_empty())
                        .collect();
                }
                "x0" => spec.x0 = num(value)?,
                "n" => spec.n = num(value)? as usize,
                "burn_in" => spec.burn_in = num(value)? as usize,
                "thin" => spec.thin = (num(value)? as usize).max(1),
                "seed" => {
                    spec.seed = value
                        .parse::<u64>()
                        .map_err(|_| at(&format!("`{value}` is not a seed")))?;
                }
                "a" => spec.a = num(value)?,
                "width" => spec.width = num(value)?,
                "bounds" => {
                    let (lo, hi) = value
                        .split_once(',')
                        .ok_or_else(|| at("bounds must be `lo, hi`"))?;
                    spec.bounds = Some((num(lo.trim())?, num(hi.trim())?));
                }
                "bins" => spec.bins = (num(value)? as usize).max(1),
                "threshold" => spec.threshold = Some(num(value)?),
                "reference" => spec.reference = Some(value.to_string()),
                other => return Err(at(&format!("unknown key `{other}`"))),
            }
        }
        if spec.name.is_empty() {
            bail!("scenario is missing `name`");
        }
        if spec.target.is_empty() {
            bail!("scenario `{}` is missing `target`", spec.name);
        }
        if spec.methods.is_empty() {
            bail!("scenario `{}` is missing `methods`", spec.name);
        }
        Ok(spec)
    }
}
