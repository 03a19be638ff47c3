//! Swap-rate and horizon rules that are resolved per `n`.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KappaRule {
    /// `constant c`, or a bare number
    Constant(f64),
    /// `n^a`
    Power(f64),
    /// `log-regime`: `n^(1/ln ln n)`, the edge of the fastest regime
    LogRegime,
}

impl KappaRule {
    pub fn resolve(&self, n: u32) -> f64 {
        let n = f64::from(n);
        match *self {
            Self::Constant(c) => c,
            Self::Power(a) => n.powf(a),
            Self::LogRegime => n.powf(1.0 / n.ln().ln().max(1.0)),
        }
    }
}

impl FromStr for KappaRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let number = |t: &str, what: &str| -> Result<f64, String> {
            let v: f64 = t.trim().parse().map_err(|_| format!("`{t}` is not a number in {what}"))?;
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(format!("{what} needs a finite nonnegative number, got {v}"))
            }
        };
        if s == "log-regime" {
            Ok(Self::LogRegime)
        } else if let Some(c) = s.strip_prefix("constant") {
            Ok(Self::Constant(number(c, "`constant c`")?))
        } else if let Some(a) = s.strip_prefix("n^") {
            Ok(Self::Power(number(a, "`n^a`")?))
        } else if s.parse::<f64>().is_ok() {
            Ok(Self::Constant(number(s, "a kappa value")?))
        } else {
            Err(format!("unknown kappa rule `{s}`; use `constant c`, `n^a`, `log-regime` or a number"))
        }
    }
}

impl fmt::Display for KappaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "constant {c}"),
            Self::Power(a) => write!(f, "n^{a}"),
            Self::LogRegime => f.write_str("log-regime"),
        }
    }
}

impl Serialize for KappaRule {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A horizon given either absolutely (`500`) or as a multiple of `n`
/// (`n`, `2n`, `0.5n`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HorizonRule {
    Absolute(f64),
    PerVertex(f64),
}

impl HorizonRule {
    pub fn resolve(&self, n: u32) -> f64 {
        match *self {
            Self::Absolute(t) => t,
            Self::PerVertex(c) => c * f64::from(n),
        }
    }
}

impl FromStr for HorizonRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (text, per_vertex) = match s.strip_suffix('n') {
            Some(c) => (c.trim().trim_end_matches('*').trim(), true),
            None => (s, false),
        };
        let value = if per_vertex && text.is_empty() {
            1.0
        } else {
            text.parse::<f64>().map_err(|_| format!("`{s}` is not a horizon; use a number or a multiple of n such as `2n`"))?
        };
        if !(value.is_finite() && value > 0.0) {
            return Err(format!("horizon must be positive, got `{s}`"));
        }
        Ok(if per_vertex {
            Self::PerVertex(value)
        } else {
            Self::Absolute(value)
        })
    }
}

impl fmt::Display for HorizonRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Absolute(t) => write!(f, "{t}"),
            Self::PerVertex(c) => write!(f, "{c}n"),
        }
    }
}

impl Serialize for HorizonRule {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_rules() {
        assert_eq!("constant 0.5".parse::<KappaRule>().unwrap().resolve(1024), 0.5);
        assert_eq!("2".parse::<KappaRule>().unwrap(), KappaRule::Constant(2.0));
        let k = "n^0.3".parse::<KappaRule>().unwrap().resolve(1024);
        assert!((k - 8.0).abs() < 1e-12);
        assert_eq!("n^1".parse::<KappaRule>().unwrap().resolve(2048), 2048.0);
        let k = "log-regime".parse::<KappaRule>().unwrap().resolve(4096);
        assert!((k - 4096f64.powf(1.0 / 4096f64.ln().ln())).abs() < 1e-9);
        assert!("fast".parse::<KappaRule>().is_err());
        assert!("constant -1".parse::<KappaRule>().is_err());
        for rule in ["constant 0.5", "n^0.3", "log-regime"] {
            assert_eq!(rule.parse::<KappaRule>().unwrap().to_string(), rule);
        }
    }

    #[test]
    fn horizon_rules() {
        assert_eq!("n".parse::<HorizonRule>().unwrap().resolve(256), 256.0);
        assert_eq!("2n".parse::<HorizonRule>().unwrap().resolve(256), 512.0);
        assert_eq!("0.5 * n".parse::<HorizonRule>().unwrap().resolve(256), 128.0);
        assert_eq!("100".parse::<HorizonRule>().unwrap().resolve(256), 100.0);
        assert!("0".parse::<HorizonRule>().is_err());
        assert!("x".parse::<HorizonRule>().is_err());
    }
}
