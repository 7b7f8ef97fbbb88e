//! Sectioned key=value scenario configs: `[scenario]` holds the run
//! parameters, an optional `[tolerances]` section overrides per-check
//! tolerances. Parse errors carry line numbers.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at line {}: {}", self.line, self.msg)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Default, Clone)]
pub struct ScenarioConfig {
    scenario: BTreeMap<String, (String, usize)>,
    pub tolerances: BTreeMap<String, f64>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError { line: lineno, msg: "unterminated section header".into() })?;
                section = name.trim().to_string();
                if section != "scenario" && section != "tolerances" {
                    return Err(ConfigError {
                        line: lineno,
                        msg: format!("unknown section '{section}' (expected scenario or tolerances)"),
                    });
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError {
                line: lineno,
                msg: format!("expected key = value, got '{line}'"),
            })?;
            let (key, value) = (key.trim().to_string(), value.trim().to_string());
            match section.as_str() {
                "scenario" => {
                    cfg.scenario.insert(key, (value, lineno));
                }
                "tolerances" => {
                    let v = value.parse::<f64>().map_err(|_| ConfigError {
                        line: lineno,
                        msg: format!("tolerance '{key}' must be a number, got '{value}'"),
                    })?;
                    cfg.tolerances.insert(key, v);
                }
                _ => {
                    return Err(ConfigError {
                        line: lineno,
                        msg: "key outside any section; start with [scenario]".into(),
                    })
                }
            }
        }
        Ok(cfg)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.scenario.get(key).map(|(v, _)| v.as_str())
    }

    pub fn line_of(&self, key: &str) -> usize {
        self.scenario.get(key).map(|&(_, l)| l).unwrap_or(0)
    }

    pub fn str_or(&self, key: &str, default: &str) -> String {
        self.get(key).unwrap_or(default).to_string()
    }

    pub fn num_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse::<f64>().map_err(|_| ConfigError {
                line: self.line_of(key),
                msg: format!("'{key}' must be a number, got '{v}'"),
            }),
        }
    }

    pub fn int_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse::<u64>().map_err(|_| ConfigError {
                line: self.line_of(key),
                msg: format!("'{key}' must be an integer, got '{v}'"),
            }),
        }
    }

    pub fn list_of_nums(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| ConfigError {
                        line: self.line_of(key),
                        msg: format!("'{key}' must be a comma-separated number list, got '{v}'"),
                    })
                })
                .collect(),
        }
    }

    pub fn list_of_strs(&self, key: &str) -> Vec<String> {
        self.get(key)
            .map(|v| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
            .unwrap_or_default()
    }
}

/// Parses a gauge spec string: `power:p=<p>`, `log1p`, `table:<path>`,
/// `section6`.
pub fn parse_gauge(spec: &str) -> Result<bmolab_core::OscillationGauge, String> {
    use bmolab_core::OscillationGauge;
    if spec == "log1p" {
        return Ok(OscillationGauge::log1p());
    }
    if spec == "section6" {
        return Ok(bmolab_core::section6_gauge());
    }
    if let Some(rest) = spec.strip_prefix("power:") {
        let p = rest
            .strip_prefix("p=")
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| format!("bad power gauge spec '{spec}' (want power:p=<value>)"))?;
        return OscillationGauge::power(p).map_err(|e| e.to_string());
    }
    if let Some(path) = spec.strip_prefix("table:") {
        let text = std::fs::read_to_string(path).map_err(|e| format!("table gauge {path}: {e}"))?;
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let t = it.next().and_then(|s| s.parse::<f64>().ok());
            let v = it.next().and_then(|s| s.parse::<f64>().ok());
            match (t, v) {
                (Some(t), Some(v)) => points.push((t, v)),
                _ => return Err(format!("table gauge {path}: bad pair on line {}", i + 1)),
            }
        }
        return OscillationGauge::from_table(points).map_err(|e| e.to_string());
    }
    Err(format!("unknown gauge spec '{spec}'"))
}
