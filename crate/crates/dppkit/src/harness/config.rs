//! Flat `key = value` configs checked against a typed schema.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Type {
    F64,
    U64,
    Usize,
    I64List,
    F64List,
    UsizeList,
    C64List,
    Choice(&'static [&'static str]),
}

/// One schema entry; `default: None` makes the key required.
#[derive(Debug, Clone, Copy)]
pub struct Field {
    pub key: &'static str,
    pub ty: Type,
    pub default: Option<&'static str>,
}

pub const fn field(key: &'static str, ty: Type, default: &'static str) -> Field {
    Field { key, ty, default: Some(default) }
}

/// Raw entries in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub entries: Vec<(String, String)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                return Err(Error::Config(format!("line {}: sections are not supported", no + 1)));
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", no + 1)));
            }
            if entries.iter().any(|e| e.0 == k) {
                return Err(Error::Config(format!("line {}: duplicate key `{k}`", no + 1)));
            }
            entries.push((k, v));
        }
        Ok(Config { entries })
    }

    pub fn from_params(params: &BTreeMap<String, String>) -> Self {
        Config { entries: params.iter().map(|(k, v)| (k.clone(), v.clone())).collect() }
    }

    /// Check every key and value against `schema` and fill in defaults.
    pub fn resolve(&self, schema: &[Field]) -> Result<Params> {
        for (k, _) in &self.entries {
            if !schema.iter().any(|f| f.key == k) {
                let known: Vec<&str> = schema.iter().map(|f| f.key).collect();
                return Err(Error::Config(format!("unknown key `{k}`; expected one of {}", known.join(", "))));
            }
        }
        let mut values = BTreeMap::new();
        for f in schema {
            let v = match self.entries.iter().find(|e| e.0 == f.key) {
                Some((_, v)) => v.clone(),
                None => f.default.ok_or_else(|| Error::Config(format!("missing required key `{}`", f.key)))?.to_string(),
            };
            check(f, &v)?;
            values.insert(f.key.to_string(), v);
        }
        Ok(Params { values })
    }
}

fn check(f: &Field, v: &str) -> Result<()> {
    let bad = |what: &str| Error::Config(format!("`{}` = `{v}` is not {what}", f.key));
    match f.ty {
        Type::F64 => parse_f64(v).map(|_| ()).ok_or_else(|| bad("a number")),
        Type::U64 => v.parse::<u64>().map(|_| ()).map_err(|_| bad("an unsigned integer")),
        Type::Usize => v.parse::<usize>().map(|_| ()).map_err(|_| bad("an unsigned integer")),
        Type::I64List => list(v, |s| s.parse::<i64>().ok()).map(|_| ()).ok_or_else(|| bad("a list of integers")),
        Type::F64List => list(v, parse_f64).map(|_| ()).ok_or_else(|| bad("a list of numbers")),
        Type::UsizeList => list(v, |s| s.parse::<usize>().ok()).map(|_| ()).ok_or_else(|| bad("a list of unsigned integers")),
        Type::C64List => list(v, parse_c64).map(|_| ()).ok_or_else(|| bad("a list of complex numbers")),
        Type::Choice(c) => {
            if c.contains(&v) {
                Ok(())
            } else {
                Err(bad(&format!("one of {}", c.join(", "))))
            }
        }
    }
}

/// A number, or `pi` scaled as in `pi`, `pi/2`, `3*pi/4`, `0.5*pi`.
pub fn parse_f64(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        return x.is_finite().then_some(x);
    }
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let factor = match num.split_once('*') {
        Some((k, p)) if p.trim() == "pi" => k.trim().parse::<f64>().ok()?,
        None if num == "pi" => 1.0,
        _ => return None,
    };
    let x = factor * PI / den;
    x.is_finite().then_some(x)
}

/// `re`, `re+imi`, `re-imi` or `imi`.
pub fn parse_c64(s: &str) -> Option<C64> {
    s.trim().parse::<C64>().ok().filter(|z| z.re.is_finite() && z.im.is_finite())
}

fn list<T>(v: &str, f: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    if v.trim().is_empty() {
        return Some(Vec::new());
    }
    v.split(',').map(|s| f(s.trim())).collect()
}

/// Validated values, defaults included. Getters only fail on a key the schema lacks.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub values: BTreeMap<String, String>,
}

impl Params {
    fn raw(&self, key: &str) -> Result<&str> {
        self.values.get(key).map(|s| s.as_str()).ok_or_else(|| Error::Config(format!("no key `{key}` in schema")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        parse_f64(self.raw(key)?).ok_or_else(|| Error::Config(format!("`{key}` is not a number")))
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.raw(key)?.parse().map_err(|_| Error::Config(format!("`{key}` is not an unsigned integer")))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.raw(key)?.parse().map_err(|_| Error::Config(format!("`{key}` is not an unsigned integer")))
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.raw(key)
    }

    pub fn i64_list(&self, key: &str) -> Result<Vec<i64>> {
        list(self.raw(key)?, |s| s.parse().ok()).ok_or_else(|| Error::Config(format!("`{key}` is not a list of integers")))
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        list(self.raw(key)?, parse_f64).ok_or_else(|| Error::Config(format!("`{key}` is not a list of numbers")))
    }

    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>> {
        list(self.raw(key)?, |s| s.parse().ok()).ok_or_else(|| Error::Config(format!("`{key}` is not a list of integers")))
    }

    pub fn c64_list(&self, key: &str) -> Result<Vec<C64>> {
        list(self.raw(key)?, parse_c64).ok_or_else(|| Error::Config(format!("`{key}` is not a list of complex numbers")))
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.values.insert(key.to_string(), value);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: &[Field] = &[
        field("a", Type::F64, "pi/2"),
        field("reps", Type::Usize, "10"),
        field("sites", Type::I64List, "0"),
        Field { key: "mode", ty: Type::Choice(&["x", "y"]), default: None },
    ];

    #[test]
    fn parses_and_resolves() {
        let c = Config::parse("# comment\nmode = y\n a = 3*pi/4 # trailing\nsites = -1, 2,5\n").unwrap();
        let p = c.resolve(SCHEMA).unwrap();
        assert!((p.f64("a").unwrap() - 3.0 * PI / 4.0).abs() < 1e-15);
        assert_eq!(p.usize("reps").unwrap(), 10);
        assert_eq!(p.i64_list("sites").unwrap(), vec![-1, 2, 5]);
        assert_eq!(p.str("mode").unwrap(), "y");
    }

    #[test]
    fn schema_errors() {
        let err = |t: &str| Config::parse(t).and_then(|c| c.resolve(SCHEMA)).unwrap_err();
        assert!(matches!(err("a = 1\n"), Error::Config(m) if m.contains("mode")));
        assert!(matches!(err("mode = z\n"), Error::Config(_)));
        assert!(matches!(err("mode = x\nbogus = 1\n"), Error::Config(m) if m.contains("bogus")));
        assert!(matches!(err("mode = x\nmode = y\n"), Error::Config(m) if m.contains("duplicate")));
        assert!(matches!(err("[s]\nmode = x\n"), Error::Config(_)));
        assert!(matches!(err("mode = x\nreps = -3\n"), Error::Config(_)));
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_f64("pi"), Some(PI));
        assert_eq!(parse_f64("0.5*pi"), Some(0.5 * PI));
        assert_eq!(parse_f64("2.5"), Some(2.5));
        assert_eq!(parse_f64("tau"), None);
        assert_eq!(parse_c64("0.04+0.06i"), Some(C64::new(0.04, 0.06)));
        assert_eq!(parse_c64("0.1"), Some(C64::new(0.1, 0.0)));
    }
}
