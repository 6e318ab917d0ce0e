//! Parameter specs, config-file merging and typed access.

use klab::arith::{is_prime, primes_in};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Clone, Copy)]
pub struct Param {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

pub const fn p(name: &'static str, default: &'static str, help: &'static str) -> Param {
    Param {
        name,
        default,
        help,
    }
}

/// Options shared by every subcommand. `config`, `out` and `emit-plot-data`
/// only choose where things go and are left out of the embedded config.
pub const GLOBAL: [Param; 6] = [
    p(
        "config",
        "",
        "key=value file; command-line flags take precedence",
    ),
    p("out", "", "output file (default: stdout)"),
    p("format", "csv", "csv or json"),
    p("threads", "0", "worker threads (0: all cores)"),
    p("seed", "0", "seed for random coefficient sequences"),
    p(
        "emit-plot-data",
        "",
        "also write long-format x,y,series CSV here",
    ),
];

const DESTINATIONS: [&str; 3] = ["config", "out", "emit-plot-data"];

#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

type R<T> = Result<T, UsageError>;

fn usage<T>(msg: String) -> R<T> {
    Err(UsageError(msg))
}

/// Resolved parameters in declaration order.
#[derive(Clone, Debug)]
pub struct Config {
    pub command: String,
    values: Vec<(String, String)>,
}

pub fn parse_config_file(text: &str) -> R<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return usage(format!("config line {}: expected key=value", i + 1));
        };
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl Config {
    /// defaults, then the config file, then flags given on the command line.
    pub fn resolve(
        command: &str,
        specs: &[Param],
        file: &BTreeMap<String, String>,
        flags: &BTreeMap<String, String>,
    ) -> R<Config> {
        let all: Vec<&Param> = GLOBAL.iter().chain(specs).collect();
        for k in file.keys() {
            if k == "config" || !all.iter().any(|p| p.name == k) {
                return usage(format!("unknown config key '{k}' for {command}"));
            }
        }
        let values = all
            .iter()
            .map(|p| {
                let v = flags
                    .get(p.name)
                    .or_else(|| file.get(p.name))
                    .map_or(p.default, |s| s.as_str());
                (p.name.to_string(), v.to_string())
            })
            .collect();
        Ok(Config {
            command: command.to_string(),
            values,
        })
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .unwrap_or_else(|| panic!("undeclared parameter {key}"))
    }

    /// The experiment-defining part of the configuration.
    pub fn embedded(&self) -> Vec<(String, String)> {
        self.values
            .iter()
            .filter(|(k, _)| !DESTINATIONS.contains(&k.as_str()))
            .cloned()
            .collect()
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        let v = self.raw(key);
        (!v.is_empty()).then(|| PathBuf::from(v))
    }

    pub fn u64(&self, key: &str) -> R<u64> {
        let v = self.raw(key);
        v.parse().or_else(|_| {
            usage(format!(
                "--{key}: expected a nonnegative integer, got '{v}'"
            ))
        })
    }

    pub fn i64(&self, key: &str) -> R<i64> {
        let v = self.raw(key);
        v.parse()
            .or_else(|_| usage(format!("--{key}: expected an integer, got '{v}'")))
    }

    pub fn f64(&self, key: &str) -> R<f64> {
        parse_real(self.raw(key)).ok_or_else(|| {
            UsageError(format!(
                "--{key}: expected a number, got '{}'",
                self.raw(key)
            ))
        })
    }

    /// A real, or `default` when the value is "auto".
    pub fn f64_or(&self, key: &str, default: f64) -> R<f64> {
        if self.raw(key) == "auto" {
            Ok(default)
        } else {
            self.f64(key)
        }
    }

    pub fn bool(&self, key: &str) -> R<bool> {
        match self.raw(key) {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" | "" => Ok(false),
            v => usage(format!("--{key}: expected true or false, got '{v}'")),
        }
    }

    pub fn choice(&self, key: &str, options: &[&str]) -> R<String> {
        let v = self.raw(key);
        if options.contains(&v) {
            Ok(v.to_string())
        } else {
            usage(format!(
                "--{key}: expected one of {}, got '{v}'",
                options.join("|")
            ))
        }
    }

    /// "a,b,c" or "start:stop[:step]" (inclusive).
    pub fn f64_list(&self, key: &str) -> R<Vec<f64>> {
        let v = self.raw(key);
        let bad = || {
            UsageError(format!(
                "--{key}: expected a list or start:stop:step, got '{v}'"
            ))
        };
        if v.contains(':') {
            let parts: Vec<f64> = v
                .split(':')
                .map(parse_real)
                .collect::<Option<_>>()
                .ok_or_else(bad)?;
            let (a, b, s) = match parts[..] {
                [a, b] => (a, b, 1.0),
                [a, b, s] if s > 0.0 => (a, b, s),
                _ => return Err(bad()),
            };
            let n = ((b - a) / s + 1e-9).floor();
            if n < 0.0 || n > 1e7 {
                return Err(bad());
            }
            Ok((0..=n as usize).map(|i| a + i as f64 * s).collect())
        } else {
            v.split(',')
                .map(|t| parse_real(t.trim()))
                .collect::<Option<_>>()
                .ok_or_else(bad)
        }
    }

    pub fn u64_list(&self, key: &str) -> R<Vec<u64>> {
        let xs = self.f64_list(key)?;
        if xs.iter().any(|&x| x < 0.0 || x.fract() != 0.0) {
            return usage(format!("--{key}: expected integers"));
        }
        Ok(xs.into_iter().map(|x| x as u64).collect())
    }

    /// Primes from "lo:hi" (all primes in the range) or an explicit list.
    pub fn primes(&self, key: &str) -> R<Vec<u64>> {
        let v = self.raw(key);
        if let Some((a, b)) = v.split_once(':') {
            let (a, b) = (a.trim().parse::<u64>(), b.trim().parse::<u64>());
            match (a, b) {
                (Ok(a), Ok(b)) if a <= b => Ok(primes_in(a, b)),
                _ => usage(format!("--{key}: expected lo:hi, got '{v}'")),
            }
        } else {
            let qs = self.u64_list(key)?;
            if let Some(q) = qs.iter().find(|&&q| !is_prime(q)) {
                return usage(format!("--{key}: {q} is not prime"));
            }
            Ok(qs)
        }
    }
}

/// Decimal or "a/b".
pub fn parse_real(s: &str) -> Option<f64> {
    if let Some((a, b)) = s.split_once('/') {
        let (a, b): (f64, f64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
        return (b != 0.0).then(|| a / b);
    }
    s.trim().parse().ok().filter(|x: &f64| x.is_finite())
}
