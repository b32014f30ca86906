//! JSON specifications for inner functions and radial weights.
//!
//! Functions and weights are described by tagged objects, e.g.
//! `{"kind":"atomic_singular","mass":2.0}` or `{"family":"power","alpha":1.0}`.
//! Custom weights are reachable only through the named registry; there is no
//! code injection path.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inner::{InnerFunction, ZeroGenerator, ZeroSequence};
use crate::weights::{registry, RadialWeight};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    FiniteBlaschke {
        zeros: Vec<[f64; 2]>,
        #[serde(default)]
        lambda: f64,
    },
    InfiniteBlaschke {
        generator: GeneratorSpec,
        #[serde(default)]
        lambda: f64,
    },
    AtomicSingular {
        #[serde(default = "default_mass")]
        mass: f64,
    },
    Frostman {
        base: Box<FunctionSpec>,
        a: [f64; 2],
    },
}

fn default_mass() -> f64 {
    2.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Exponential,
    PolynomialDecay { c: f64 },
    AtomicFrostman { a: [f64; 2] },
}

impl FunctionSpec {
    pub fn build(&self) -> Result<InnerFunction> {
        match self {
            FunctionSpec::FiniteBlaschke { zeros, lambda } => InnerFunction::finite_blaschke(
                zeros.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
                *lambda,
            ),
            FunctionSpec::InfiniteBlaschke { generator, lambda } => {
                let gen = match generator {
                    GeneratorSpec::Exponential => ZeroGenerator::Exponential,
                    GeneratorSpec::PolynomialDecay { c } => ZeroGenerator::PolynomialDecay { c: *c },
                    GeneratorSpec::AtomicFrostman { a } => ZeroGenerator::AtomicFrostman {
                        a: Complex64::new(a[0], a[1]),
                    },
                };
                Ok(InnerFunction::infinite_blaschke(
                    ZeroSequence::generated(gen)?,
                    *lambda,
                ))
            }
            FunctionSpec::AtomicSingular { mass } => InnerFunction::atomic_singular(*mass),
            FunctionSpec::Frostman { base, a } => {
                base.build()?.frostman(Complex64::new(a[0], a[1]))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Power { alpha: f64 },
    PowerLog { alpha: f64, beta: f64 },
    Exponential,
    Custom { name: String },
}

impl WeightSpec {
    pub fn build(&self) -> Result<RadialWeight> {
        match self {
            WeightSpec::Power { alpha } => RadialWeight::power(*alpha),
            WeightSpec::PowerLog { alpha, beta } => RadialWeight::power_log(*alpha, *beta),
            WeightSpec::Exponential => Ok(RadialWeight::exponential()),
            WeightSpec::Custom { name } => registry(name).ok_or_else(|| {
                Error::config("weight.name", format!("unknown custom weight `{name}`"))
            }),
        }
    }
}

/// Parses a function spec from JSON, prefixing errors with `path`.
pub fn function_from_json(path: &str, text: &str) -> Result<InnerFunction> {
    let spec: FunctionSpec =
        serde_json::from_str(text).map_err(|e| Error::config(path, e.to_string()))?;
    spec.build()
}

/// Parses a weight spec from JSON, prefixing errors with `path`.
pub fn weight_from_json(path: &str, text: &str) -> Result<RadialWeight> {
    let spec: WeightSpec =
        serde_json::from_str(text).map_err(|e| Error::config(path, e.to_string()))?;
    spec.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_functions_from_json() {
        let f = function_from_json("function", r#"{"kind":"atomic_singular"}"#).unwrap();
        assert!(matches!(f, InnerFunction::AtomicSingular { mass } if mass == 2.0));

        let f = function_from_json(
            "function",
            r#"{"kind":"frostman","base":{"kind":"atomic_singular","mass":2.0},"a":[0.3,0.2]}"#,
        )
        .unwrap();
        assert!(matches!(f, InnerFunction::Frostman { .. }));

        let f = function_from_json(
            "function",
            r#"{"kind":"finite_blaschke","zeros":[[0.5,0.0],[-0.5,0.0]]}"#,
        )
        .unwrap();
        assert!(matches!(f, InnerFunction::FiniteBlaschke { ref zeros, .. } if zeros.len() == 2));

        let f = function_from_json(
            "function",
            r#"{"kind":"infinite_blaschke","generator":{"name":"polynomial_decay","c":2.0}}"#,
        )
        .unwrap();
        assert!(matches!(f, InnerFunction::InfiniteBlaschke { .. }));
    }

    #[test]
    fn builds_weights_from_json() {
        assert!(weight_from_json("weight", r#"{"family":"power","alpha":1.0}"#).is_ok());
        assert!(
            weight_from_json("weight", r#"{"family":"power_log","alpha":1.0,"beta":1.0}"#).is_ok()
        );
        assert!(weight_from_json("weight", r#"{"family":"custom","name":"slow_tail"}"#).is_ok());
        let err = weight_from_json("weight", r#"{"family":"custom","name":"nope"}"#).unwrap_err();
        assert!(err.to_string().contains("nope"));
    }

    #[test]
    fn rejects_unknown_fields_with_path() {
        let err = function_from_json("function", r#"{"kind":"atomic_singular","masss":2}"#)
            .unwrap_err();
        assert!(err.to_string().contains("function"));
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(function_from_json("function", r#"{"kind":"atomic_singular","mass":-1}"#).is_err());
        assert!(weight_from_json("weight", r#"{"family":"power","alpha":-2}"#).is_err());
    }
}
