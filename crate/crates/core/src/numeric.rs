//! Extended-real helpers shared by the discrete and continuum models.
//!
//! Costs live in `[0, +inf]`. An overloaded base station yields `+inf`, which
//! compares above every finite value and equal to itself.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// `[x]^+ = max(x, 0)`.
#[inline]
pub fn positive_part(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// `numerator / [slack]^+`, with a zero denominator mapping to `+inf`.
#[inline]
pub fn over_positive_part(numerator: f64, slack: f64) -> f64 {
    let denom = positive_part(slack);
    if denom == 0.0 {
        f64::INFINITY
    } else {
        numerator / denom
    }
}

/// `a < b` after allowing an absolute tie band of `tol`.
#[inline]
pub fn strictly_less(a: f64, b: f64, tol: f64) -> bool {
    a < b - tol
}

/// `a <= b` within the tie band `tol`. `+inf <= +inf` holds.
#[inline]
pub fn weakly_less(a: f64, b: f64, tol: f64) -> bool {
    a == b || a <= b + tol
}

/// Subtraction under the limit convention `inf - inf = inf`.
#[inline]
pub fn limit_sub(a: f64, b: f64) -> f64 {
    if a.is_infinite() {
        f64::INFINITY
    } else {
        a - b
    }
}

/// Serde adapter writing `+inf` as the string `"inf"` so JSON stays valid.
pub mod extended {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else if *x < 0.0 {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => match s.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

/// Same as [`extended`] for vectors.
pub mod extended_vec {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super::extended")] f64);

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let wrapped: Vec<Wrap> = xs.iter().map(|&x| Wrap(x)).collect();
        wrapped.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let wrapped = Vec::<Wrap>::deserialize(d)?;
        Ok(wrapped.into_iter().map(|w| w.0).collect())
    }
}
