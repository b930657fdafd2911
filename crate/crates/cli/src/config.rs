//! `key = value` run configuration files.

use std::collections::BTreeMap;
use std::fmt;

/// Parse failure tied to a 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Entries of a configuration file with the line each came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, (String, usize)>,
}

impl KeyValues {
    /// Blank lines and lines starting with `#` are ignored; keys may appear once.
    pub fn parse(text: &str) -> Result<Self, LineError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(LineError { line, message: format!("expected `key = value`, got `{content}`") });
            };
            let (key, value) = (key.trim().to_string(), value.trim().to_string());
            if key.is_empty() {
                return Err(LineError { line, message: "missing key".into() });
            }
            if entries.insert(key.clone(), (value, line)).is_some() {
                return Err(LineError { line, message: format!("duplicate key `{key}`") });
            }
        }
        Ok(Self { entries })
    }

    /// Fails on the first key not in `known`.
    pub fn check_keys(&self, known: &[&str]) -> Result<(), LineError> {
        let mut unknown: Vec<(&String, usize)> =
            self.entries.iter().filter(|(k, _)| !known.contains(&k.as_str())).map(|(k, (_, l))| (k, *l)).collect();
        unknown.sort_by_key(|&(_, l)| l);
        match unknown.first() {
            Some(&(key, line)) => Err(LineError { line, message: format!("unknown key `{key}`") }),
            None => Ok(()),
        }
    }

    /// Parses the value of `key` with `parse`, reporting failures on the key's line.
    pub fn get<T, F>(&self, key: &str, parse: F) -> Result<Option<T>, LineError>
    where
        F: FnOnce(&str) -> Result<T, String>,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((value, line)) => parse(value)
                .map(Some)
                .map_err(|why| LineError { line: *line, message: format!("`{key}`: {why}") }),
        }
    }
}

pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if let Some((start, rest)) = text.split_once(':') {
        let (stop, step) = rest.split_once(':').ok_or("ranges are `start:stop:step`")?;
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("bad number `{}`", s.trim()));
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if !(step > 0.0) || stop < start || !start.is_finite() || !stop.is_finite() {
            return Err(format!("bad range `{text}`"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|i| start + i as f64 * step).collect());
    }
    let values: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad number `{}`", s.trim())))
        .collect::<Result<_, _>>()?;
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(format!("bad list `{text}`"));
    }
    Ok(values)
}

pub fn parse_bool(text: &str) -> Result<bool, String> {
    match text.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(format!("expected true or false, got `{other}`")),
    }
}

pub fn format_list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reports_lines() {
        let kv = KeyValues::parse("# comment\n\nn = 1000\ncode=1,5/7\n").unwrap();
        assert_eq!(kv.get("n", |v| v.parse::<usize>().map_err(|e| e.to_string())).unwrap(), Some(1000));
        assert_eq!(kv.get("missing", |v| Ok(v.to_string())).unwrap(), None);
        let err = kv.get("n", |_| Err::<(), _>("nope".into())).unwrap_err();
        assert_eq!(err.line, 3);
        assert_eq!(KeyValues::parse("a = 1\nb\n").unwrap_err().line, 2);
        assert_eq!(KeyValues::parse("a = 1\na = 2\n").unwrap_err().line, 2);
        let kv = KeyValues::parse("a = 1\nzz = 2\n").unwrap();
        assert_eq!(kv.check_keys(&["a"]).unwrap_err(), LineError { line: 2, message: "unknown key `zz`".into() });
    }

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_list("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_list("0.2, 1.0").unwrap(), vec![0.2, 1.0]);
        assert_eq!(parse_list("0:7:0.25").unwrap().len(), 29);
        assert!(parse_list("1:0:0.5").is_err());
        assert!(parse_list("a,b").is_err());
        assert!(parse_bool("maybe").is_err());
    }
}
