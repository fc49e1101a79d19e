//! The JSON run report.

use std::collections::BTreeMap;

use projein::obstructions::DifferentialForm;
use projein::{Scalar, Tensor, Var};
use serde::{Deserialize, Serialize};

use crate::manifest::{Manifest, Ring};
use crate::CliError;

/// A scalar: `"p/q"` on the exact ring, a JSON number on the float ring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Exact(String),
    Float(f64),
}

impl Value {
    pub fn of<F: Scalar>(x: &F) -> Self {
        if F::EXACT {
            let s = x.to_string();
            if s.contains('/') {
                Value::Exact(s)
            } else {
                Value::Exact(format!("{s}/1"))
            }
        } else {
            Value::Float(x.to_f64())
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Float(v) => *v,
            Value::Exact(s) => s.parse::<projein::Rational>().map(|q| q.to_f64()).unwrap_or(f64::NAN),
        }
    }
}

/// Point values of a tensor, flattened row-major over its slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorValue {
    /// One character per slot: `u` (upper) or `d` (lower).
    pub slots: String,
    pub weight: i32,
    pub values: Vec<Value>,
}

impl TensorValue {
    pub fn of<F: Scalar>(t: &Tensor<F>) -> Self {
        TensorValue {
            slots: t.slots().iter().map(|v| if *v == Var::Up { 'u' } else { 'd' }).collect(),
            weight: t.weight(),
            values: t.data().iter().map(|j| Value::of(j.value())).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max)
    }
}

/// Nonzero point values of a differential form, keyed by `"i,j,…"` with
/// increasing indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormValue {
    pub degree: usize,
    pub components: BTreeMap<String, Value>,
}

impl FormValue {
    pub fn of<F: Scalar>(f: &DifferentialForm<F>) -> Self {
        let components = f
            .components
            .iter()
            .filter(|(_, j)| !j.value().is_zero())
            .map(|(ix, j)| (ix.iter().map(usize::to_string).collect::<Vec<_>>().join(","), Value::of(j.value())))
            .collect();
        FormValue { degree: f.degree, components }
    }

    pub fn max_abs(&self) -> f64 {
        self.components.values().map(|v| v.to_f64().abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantsReport {
    pub weyl: TensorValue,
    pub schouten: TensorValue,
    pub beta: TensorValue,
    pub cotton: TensorValue,
    /// `β = 0`: the connection preserves a volume form.
    pub scale_connection: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChernReport {
    pub k: usize,
    pub p: FormValue,
    pub q: FormValue,
    pub p_equals_q: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubMetricReport {
    pub lambda: Value,
    /// `"declared"` or `"inferred"` (from `J` at the point).
    pub lambda_source: String,
    pub derivative_max: f64,
    pub parallel: bool,
    pub skewness_max: f64,
    pub skew: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TractorReport {
    pub omega_max: f64,
    pub annihilates_x: bool,
    /// `max |[∇_a, ∇_b]T − Ω_ab T|` over a probe tractor.
    pub commutator_residual: f64,
    pub commutator_matches: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub submetric: Option<SubMetricReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenericityReport {
    pub rank: usize,
    pub margin: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorValues {
    pub upsilon: TensorValue,
    pub g: TensorValue,
    pub gamma: Value,
    pub gamma_weight: i32,
    pub e: TensorValue,
    pub e_max: f64,
    pub e_skew_max: f64,
    pub cotton_flat_max: f64,
    pub g_skew_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EinsteinPointReport {
    pub genericity: GenericityReport,
    pub ricci_flat: bool,
    pub projectively_flat: bool,
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<DetectorValues>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalReport {
    pub lambda: Value,
    pub weyl_norm_sq: Value,
    pub compare_weyl_max: f64,
    pub schouten_halving_max: f64,
    pub schouten_einstein_max: f64,
    pub iota_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim4_identity_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WedgeReport {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub gram_det: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minors: Option<Vec<Value>>,
    pub vanishes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub index: usize,
    pub coordinates: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariants: Option<InvariantsReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub chern: Vec<ChernReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tractor: Option<TractorReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub einstein: Option<EinsteinPointReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conformal: Option<ConformalReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wedge: Option<WedgeReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub strategy: String,
    pub classification: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_ms: f64,
    pub points_ms: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub manifest: Manifest,
    pub dimension: usize,
    pub ring: Ring,
    pub seed: u64,
    pub tolerance: f64,
    pub points: Vec<PointReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports contain only finite data");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Report(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use projein::{Jet, Rational};

    #[test]
    fn exact_values_always_carry_a_denominator() {
        assert_eq!(Value::of(&Rational::integer(3)), Value::Exact("3/1".into()));
        assert_eq!(Value::of(&Rational::new(-1, 6)), Value::Exact("-1/6".into()));
        assert_eq!(Value::of(&0.1f64), Value::Float(0.1));
    }

    #[test]
    fn values_round_trip_through_json() {
        let vs = vec![Value::Exact("7/3".into()), Value::Float(1.0 / 3.0), Value::Float(-2.5e-300)];
        let s = serde_json::to_string(&vs).unwrap();
        assert_eq!(serde_json::from_str::<Vec<Value>>(&s).unwrap(), vs);
    }

    #[test]
    fn tensor_values_record_slots() {
        let t = Tensor::from_fn(2, vec![Var::Up, Var::Down], |ix| {
            Jet::constant(2, 0, Rational::integer((ix[0] * 2 + ix[1]) as i64))
        });
        let v = TensorValue::of(&t);
        assert_eq!(v.slots, "ud");
        assert_eq!(v.max_abs(), 3.0);
    }
}
