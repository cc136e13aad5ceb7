//! Per-row LP results shared by the refinement and satisfaction checkers, and
//! the JSON encoding of extended reals.

use nalgebra::DVector;
use serde::{Serialize, Serializer};

use crate::lp::LpOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Outcome of one implication LP: `theta` is the worst conclusion-row value
/// over the premise set, `-inf` for an empty premise, `+inf` if unbounded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowResult<F> {
    pub family: F,
    pub row: usize,
    pub status: RowStatus,
    #[serde(serialize_with = "ext_real::serialize")]
    pub theta: f64,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "opt_vec")]
    pub witness: Option<DVector<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "opt_vec")]
    pub ray: Option<DVector<f64>>,
}

impl<F> RowResult<F> {
    /// Folds the objective constant into the LP value. Witnesses are kept for
    /// every strictly positive `theta`.
    pub fn from_outcome(family: F, row: usize, outcome: LpOutcome, constant: f64) -> Self {
        match outcome {
            LpOutcome::Optimal { value, point } => {
                let theta = value + constant;
                RowResult {
                    family,
                    row,
                    status: RowStatus::Optimal,
                    theta,
                    witness: (theta > 0.0).then_some(point),
                    ray: None,
                }
            }
            LpOutcome::Infeasible => RowResult {
                family,
                row,
                status: RowStatus::Infeasible,
                theta: f64::NEG_INFINITY,
                witness: None,
                ray: None,
            },
            LpOutcome::Unbounded { ray } => RowResult {
                family,
                row,
                status: RowStatus::Unbounded,
                theta: f64::INFINITY,
                witness: None,
                ray: Some(ray),
            },
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.status != RowStatus::Unbounded && self.theta <= tol
    }
}

/// Maximum of a slice, `-inf` when empty.
pub fn max_or_neg_inf(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn opt_vec<S: Serializer>(v: &Option<DVector<f64>>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_seq(v.iter()),
        None => s.serialize_none(),
    }
}

/// Extended reals in JSON: finite values are numbers, infinities are the
/// strings `"+inf"` and `"-inf"`.
pub mod ext_real {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_str("nan")
        } else if *v == f64::INFINITY {
            s.serialize_str("+inf")
        } else if *v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = f64;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number or one of \"+inf\", \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                match v {
                    "+inf" | "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }

    /// For `Vec<f64>` fields.
    pub mod vec {
        use serde::ser::SerializeSeq;
        use serde::Serializer;

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&super::Wrap(*x))?;
            }
            seq.end()
        }
    }

    pub(crate) struct Wrap(pub f64);

    impl serde::Serialize for Wrap {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            serialize(&self.0, s)
        }
    }
}
