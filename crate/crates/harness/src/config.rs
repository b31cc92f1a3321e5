//! `key = value` model configuration.
//!
//! Recognised keys: `model`, `sigma`, `alpha`, `beta`, `delta`, `nu`,
//! `theta`, `scale`, `S0`, `r`, `T`. Blank lines and lines starting with `#`
//! are ignored. For the stable model `theta` is the location.

use std::collections::BTreeMap;

use cos_core::{MarketContext, ModelSpec};

use crate::{HarnessError, Result};

pub const KEYS: [&str; 11] = ["model", "sigma", "alpha", "beta", "delta", "nu", "theta", "scale", "S0", "r", "T"];

/// Raw settings, later entries overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| HarnessError::Config {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(HarnessError::Config {
                    line: i + 1,
                    message: format!("unknown key `{key}`"),
                });
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| HarnessError::Usage(format!("`{key}` is not a number: `{v}`")))
            })
            .transpose()
    }

    fn required(&self, key: &str, model: &str) -> Result<f64> {
        self.number(key)?
            .ok_or_else(|| HarnessError::Usage(format!("model `{model}` needs `{key}`")))
    }

    pub fn market(&self) -> Result<MarketContext> {
        let spot = self.number("S0")?.unwrap_or(100.0);
        let rate = self.number("r")?.unwrap_or(0.0);
        let maturity = self.number("T")?.unwrap_or(1.0);
        Ok(MarketContext::new(spot, rate, maturity)?)
    }

    pub fn model(&self) -> Result<ModelSpec> {
        let name = self
            .get("model")
            .ok_or_else(|| HarnessError::Usage("no model given".into()))?
            .to_ascii_lowercase();
        let spec = match name.as_str() {
            "bs" | "black-scholes" | "blackscholes" => ModelSpec::black_scholes(self.required("sigma", &name)?)?,
            "nig" => ModelSpec::nig(self.required("alpha", &name)?, self.required("delta", &name)?)?,
            "vg" => ModelSpec::variance_gamma(
                self.required("sigma", &name)?,
                self.required("nu", &name)?,
                self.number("theta")?.unwrap_or(0.0),
            )?,
            "fmls" => ModelSpec::fmls(self.required("alpha", &name)?, self.required("sigma", &name)?)?,
            "stable" => ModelSpec::stable(
                self.required("alpha", &name)?,
                self.number("beta")?.unwrap_or(0.0),
                self.required("scale", &name)?,
                self.number("theta")?.unwrap_or(0.0),
            )?,
            "cauchy" => ModelSpec::Cauchy,
            other => return Err(HarnessError::Usage(format!("unknown model `{other}`"))),
        };
        Ok(spec)
    }
}
