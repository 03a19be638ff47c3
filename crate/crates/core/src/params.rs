//! Model parameterization.

use serde::{Deserialize, Serialize};

use crate::error::ParamError;

/// Size of the closed neighbourhood of a vertex, counted with slot
/// multiplicity: the vertex itself plus `2r - 1` block mates in each of the
/// `d` layers.
pub const fn derive_m(r: u32, d: u32) -> u32 {
    1 + d * (2 * r - 1)
}

/// Full parameterization of the supermarket model on a dynamic
/// `d`-regular `2r`-uniform hypergraph.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelParams {
    n: u32,
    r: u32,
    d: u32,
    lambda: f64,
    kappa: f64,
    m: u32,
}

impl ModelParams {
    pub fn new(n: u32, r: u32, d: u32, lambda: f64, kappa: f64) -> Result<Self, ParamError> {
        if n == 0 {
            return Err(ParamError::EmptyVertexSet);
        }
        if r == 0 {
            return Err(ParamError::ZeroHalfOrder);
        }
        if d == 0 {
            return Err(ParamError::ZeroRegularity);
        }
        let block = 2 * u64::from(r);
        if u64::from(n) % block != 0 {
            return Err(ParamError::Divisibility { n, r });
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(ParamError::ArrivalRate(lambda));
        }
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(ParamError::SwapRate(kappa));
        }
        Ok(Self {
            n,
            r,
            d,
            lambda,
            kappa,
            m: derive_m(r, d),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Hyperedge order `2r`.
    pub fn block_size(&self) -> u32 {
        2 * self.r
    }

    /// `m * lambda < 1/2`: the regime in which the closed-form bounds are
    /// certified. Analysis code that leans on them checks this first.
    pub fn small_lambda_valid(&self) -> bool {
        f64::from(self.m) * self.lambda < 0.5
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self, ParamError> {
        Self::new(self.n, self.r, self.d, self.lambda, kappa)
    }

    pub fn with_n(&self, n: u32) -> Result<Self, ParamError> {
        Self::new(n, self.r, self.d, self.lambda, self.kappa)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self, ParamError> {
        Self::new(self.n, self.r, self.d, lambda, self.kappa)
    }
}

#[derive(Deserialize)]
struct RawParams {
    n: u32,
    r: u32,
    d: u32,
    lambda: f64,
    kappa: f64,
}

impl<'de> Deserialize<'de> for ModelParams {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = RawParams::deserialize(de)?;
        ModelParams::new(raw.n, raw.r, raw.d, raw.lambda, raw.kappa).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbourhood_size() {
        assert_eq!(derive_m(1, 1), 2);
        assert_eq!(derive_m(1, 3), 4);
        assert_eq!(derive_m(2, 2), 7);
    }

    #[test]
    fn divisibility_is_enforced() {
        assert!(ModelParams::new(15, 1, 1, 0.1, 1.0).is_err());
        assert!(ModelParams::new(16, 1, 1, 0.1, 1.0).is_ok());
        assert!(matches!(
            ModelParams::new(14, 2, 1, 0.1, 1.0),
            Err(ParamError::Divisibility { n: 14, r: 2 })
        ));
    }

    #[test]
    fn rates_are_validated() {
        assert!(ModelParams::new(4, 1, 1, 0.0, 1.0).is_err());
        assert!(ModelParams::new(4, 1, 1, f64::NAN, 1.0).is_err());
        assert!(ModelParams::new(4, 1, 1, 0.1, -1.0).is_err());
        assert!(ModelParams::new(4, 1, 1, 0.1, 0.0).is_ok());
    }

    #[test]
    fn small_lambda_flag() {
        let p = ModelParams::new(4, 1, 1, 0.2, 1.0).unwrap();
        assert!(p.small_lambda_valid());
        let p = ModelParams::new(4, 1, 1, 0.25, 1.0).unwrap();
        assert!(!p.small_lambda_valid());
        let p = ModelParams::new(8, 2, 2, 0.05, 1.0).unwrap();
        assert_eq!(p.m(), 7);
        assert!(p.small_lambda_valid());
    }

    #[test]
    fn serde_validates() {
        let ok: ModelParams =
            serde_json::from_str(r#"{"n":8,"r":2,"d":1,"lambda":0.1,"kappa":1.0}"#).unwrap();
        assert_eq!(ok.m(), 4);
        let bad = serde_json::from_str::<ModelParams>(r#"{"n":6,"r":2,"d":1,"lambda":0.1,"kappa":1.0}"#);
        assert!(bad.is_err());
    }
}
