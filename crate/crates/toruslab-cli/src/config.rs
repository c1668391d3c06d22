//! Flat `key = value` configuration with `[section]` headers. No nesting, no
//! interpolation: reproducibility over flexibility.

use std::collections::BTreeMap;

#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error at line {} ({}): {}", self.line, self.field, self.message)
    }
}

#[derive(Debug, Clone)]
pub struct Config {
    entries: BTreeMap<(String, String), (String, usize)>,
    pub text: String,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| ConfigError {
                    line: line_no,
                    field: line.to_string(),
                    message: "unterminated section header".into(),
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError {
                line: line_no,
                field: line.to_string(),
                message: "expected 'key = value'".into(),
            })?;
            entries.insert(
                (section.clone(), key.trim().to_string()),
                (value.trim().to_string(), line_no),
            );
        }
        Ok(Self { entries, text: text.to_string() })
    }

    pub fn empty() -> Self {
        Self { entries: BTreeMap::new(), text: String::new() }
    }

    fn entry(&self, section: &str, key: &str) -> Option<&(String, usize)> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    pub fn get_str(&self, section: &str, key: &str) -> Option<&str> {
        self.entry(section, key).map(|(v, _)| v.as_str())
    }

    pub fn require_str(&self, section: &str, key: &str) -> Result<&str, ConfigError> {
        self.get_str(section, key).ok_or_else(|| ConfigError {
            line: 0,
            field: format!("[{section}] {key}"),
            message: "required key missing".into(),
        })
    }

    pub fn get_f64(&self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.entry(section, key) {
            None => Ok(None),
            Some((v, line)) => toruslab::region::parse_scalar(v)
                .map(Some)
                .map_err(|message| ConfigError {
                    line: *line,
                    field: format!("[{section}] {key}"),
                    message,
                }),
        }
    }

    pub fn get_u64(&self, section: &str, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.entry(section, key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<u64>().map(Some).map_err(|e| ConfigError {
                line: *line,
                field: format!("[{section}] {key}"),
                message: e.to_string(),
            }),
        }
    }

    pub fn get_usize(&self, section: &str, key: &str) -> Result<Option<usize>, ConfigError> {
        Ok(self.get_u64(section, key)?.map(|v| v as usize))
    }

    /// Interval-union value, e.g. `time = [0, 1) [1.5, 2)`.
    pub fn get_intervals(
        &self,
        section: &str,
        key: &str,
        period: f64,
    ) -> Result<Option<toruslab::region::IntervalUnion>, ConfigError> {
        match self.entry(section, key) {
            None => Ok(None),
            Some((v, line)) => toruslab::region::parse_interval_union(v, period)
                .map(Some)
                .map_err(|message| ConfigError {
                    line: *line,
                    field: format!("[{section}] {key}"),
                    message,
                }),
        }
    }

    /// Integer list value, e.g. `coefficients = 0 0 0 1`.
    pub fn get_i64_list(&self, section: &str, key: &str) -> Result<Option<Vec<i64>>, ConfigError> {
        match self.entry(section, key) {
            None => Ok(None),
            Some((v, line)) => {
                let mut out = Vec::new();
                for tok in v.split_whitespace() {
                    out.push(tok.parse::<i64>().map_err(|e| ConfigError {
                        line: *line,
                        field: format!("[{section}] {key}"),
                        message: format!("'{tok}': {e}"),
                    })?);
                }
                Ok(Some(out))
            }
        }
    }

    pub fn get_f64_list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.entry(section, key) {
            None => Ok(None),
            Some((v, line)) => {
                let mut out = Vec::new();
                for tok in v.split_whitespace() {
                    out.push(toruslab::region::parse_scalar(tok).map_err(|message| {
                        ConfigError {
                            line: *line,
                            field: format!("[{section}] {key}"),
                            message,
                        }
                    })?);
                }
                Ok(Some(out))
            }
        }
    }

    pub fn line_of(&self, section: &str, key: &str) -> usize {
        self.entry(section, key).map(|(_, l)| *l).unwrap_or(0)
    }
}

/// Parse a state description: comma-separated `sin k amp`, `cos k amp`,
/// `mode k re im` terms.
pub fn parse_state(
    text: &str,
    n_max: usize,
    line: usize,
    field: &str,
) -> Result<toruslab::spectral::FourierState, ConfigError> {
    use num_complex::Complex64;
    let mut state = toruslab::spectral::FourierState::zeros(n_max);
    let err = |message: String| ConfigError { line, field: field.to_string(), message };
    for term in text.split(',') {
        let toks: Vec<&str> = term.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let need = |n: usize| -> Result<(), ConfigError> {
            if toks.len() != n {
                Err(err(format!("term '{term}' needs {n} tokens")))
            } else {
                Ok(())
            }
        };
        let parse_k = |s: &str| -> Result<i64, ConfigError> {
            s.parse::<i64>().map_err(|e| err(format!("bad frequency '{s}': {e}")))
        };
        let parse_x = |s: &str| -> Result<f64, ConfigError> {
            toruslab::region::parse_scalar(s).map_err(&err)
        };
        match toks[0] {
            "sin" => {
                need(3)?;
                let k = parse_k(toks[1])?;
                let amp = parse_x(toks[2])?;
                let add = toruslab::spectral::FourierState::sine(n_max, k, amp);
                state = state.add(&add);
            }
            "cos" => {
                need(3)?;
                let k = parse_k(toks[1])?;
                let amp = parse_x(toks[2])?;
                let add = toruslab::spectral::FourierState::cosine(n_max, k, amp);
                state = state.add(&add);
            }
            "mode" => {
                need(4)?;
                let k = parse_k(toks[1])?;
                let re = parse_x(toks[2])?;
                let im = parse_x(toks[3])?;
                state.set_coeff(k, state.coeff(k) + Complex64::new(re, im));
            }
            other => return Err(err(format!("unknown term kind '{other}'"))),
        }
    }
    Ok(state)
}
