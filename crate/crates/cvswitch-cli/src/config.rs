//! Run configuration plumbing: an optional flat TOML file supplies values
//! for any flag the user omitted (command-line flags always win), and every
//! output carries an FNV-1a hash of the effective run parameters so result
//! files can be traced back to exactly what produced them.

use std::fmt::Write as _;
use std::path::Path;
use toml::Value;

/// A parsed flat key-value configuration file. Keys are named exactly like
/// the long command-line flags (`nu`, `trials`, `x-range`, ...). Nested
/// tables are rejected.
#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    table: toml::Table,
}

impl FileConfig {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("reading config {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("config {}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let table: toml::Table = text.parse().map_err(|e| format!("{e}"))?;
        for (key, value) in &table {
            if matches!(value, Value::Table(_)) {
                return Err(format!(
                    "key `{key}` holds a table; only flat `key = value` entries are allowed"
                ));
            }
        }
        Ok(Self { table })
    }

    /// Reject keys this command does not understand, so typos fail loudly
    /// instead of silently running with defaults.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), String> {
        for key in self.table.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(format!(
                    "unknown config key `{key}` (this command accepts: {})",
                    allowed.join(", ")
                ));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.table.get(key)
    }

    fn type_error(key: &str, want: &str, got: &Value) -> String {
        format!("config key `{key}` must be {want} (got `{got}`)")
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, String> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => Err(Self::type_error(key, "a number", other)),
        }
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, String> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(other) => Err(Self::type_error(key, "a non-negative integer", other)),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, String> {
        Ok(self.u64(key)?.map(|v| v as usize))
    }

    /// A list of integers; a bare integer is accepted as a one-element list.
    pub fn usize_list(&self, key: &str) -> Result<Option<Vec<usize>>, String> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(vec![*i as usize])),
            Some(Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    match item {
                        Value::Integer(i) if *i >= 0 => out.push(*i as usize),
                        other => {
                            return Err(Self::type_error(key, "non-negative integers", other))
                        }
                    }
                }
                Ok(Some(out))
            }
            Some(other) => Err(Self::type_error(key, "an integer list", other)),
        }
    }

    /// A list of numbers; a bare number is accepted as a one-element list.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, String> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(vec![*x])),
            Some(Value::Integer(i)) => Ok(Some(vec![*i as f64])),
            Some(Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    match item {
                        Value::Float(x) => out.push(*x),
                        Value::Integer(i) => out.push(*i as f64),
                        other => return Err(Self::type_error(key, "numbers", other)),
                    }
                }
                Ok(Some(out))
            }
            Some(other) => Err(Self::type_error(key, "a number list", other)),
        }
    }

    /// A list of strings; a bare string is accepted as a one-element list.
    pub fn string_list(&self, key: &str) -> Result<Option<Vec<String>>, String> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(vec![s.clone()])),
            Some(Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    match item {
                        Value::String(s) => out.push(s.clone()),
                        other => return Err(Self::type_error(key, "strings", other)),
                    }
                }
                Ok(Some(out))
            }
            Some(other) => Err(Self::type_error(key, "a string list", other)),
        }
    }

    /// A two-number `[lo, hi]` pair.
    pub fn pair(&self, key: &str) -> Result<Option<(f64, f64)>, String> {
        match self.f64_list(key)? {
            None => Ok(None),
            Some(values) if values.len() == 2 => Ok(Some((values[0], values[1]))),
            Some(values) => Err(format!(
                "config key `{key}` must be a two-element [lo, hi] pair (got {} elements)",
                values.len()
            )),
        }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Hash the effective run parameters (one `key=value` line each, in the
/// command's fixed field order). Output-routing choices — path, format,
/// worker count — are deliberately excluded: they do not change the data.
pub fn canonical_hash(entries: &[(&str, String)]) -> String {
    let mut text = String::new();
    for (key, value) in entries {
        let _ = writeln!(text, "{key}={value}");
    }
    format!("fnv1a:{:016x}", fnv1a64(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_matches_published_vectors() {
        assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x8594_4171_f739_67e8);
    }

    #[test]
    fn canonical_hash_is_order_sensitive_and_stable() {
        let a = canonical_hash(&[("nu", "100".into()), ("seed", "7".into())]);
        let b = canonical_hash(&[("nu", "100".into()), ("seed", "7".into())]);
        let c = canonical_hash(&[("seed", "7".into()), ("nu", "100".into())]);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.starts_with("fnv1a:"));
        assert_eq!(a.len(), "fnv1a:".len() + 16);
    }

    #[test]
    fn typed_getters_read_flat_toml() {
        let cfg = FileConfig::parse(
            "nu = 500\ntrials = 20\nxbar = 0.25\nn = [3, 5]\nscheme = \"switch_control\"\nx-range = [-0.1, 0.4]\n",
        )
        .unwrap();
        assert_eq!(cfg.u64("nu").unwrap(), Some(500));
        assert_eq!(cfg.f64("xbar").unwrap(), Some(0.25));
        assert_eq!(cfg.f64("trials").unwrap(), Some(20.0));
        assert_eq!(cfg.usize_list("n").unwrap(), Some(vec![3, 5]));
        assert_eq!(
            cfg.string_list("scheme").unwrap(),
            Some(vec!["switch_control".to_string()])
        );
        assert_eq!(cfg.pair("x-range").unwrap(), Some((-0.1, 0.4)));
        assert_eq!(cfg.u64("absent").unwrap(), None);
    }

    #[test]
    fn bad_shapes_are_rejected() {
        let cfg = FileConfig::parse("nu = \"many\"\npair = [1.0]\n").unwrap();
        assert!(cfg.u64("nu").is_err());
        assert!(cfg.pair("pair").is_err());
        assert!(FileConfig::parse("[section]\nkey = 1\n").is_err());
        let cfg = FileConfig::parse("bogus = 1\n").unwrap();
        assert!(cfg.check_keys(&["nu", "seed"]).is_err());
        assert!(cfg.check_keys(&["bogus"]).is_ok());
    }
}
