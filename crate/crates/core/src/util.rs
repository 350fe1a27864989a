//! Small shared helpers.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Serialize an `f64` so that infinities and NaN survive JSON.
pub mod float_or_inf {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad float `{other}`"))),
            },
        }
    }
}

/// FNV-1a, used for stable identifiers derived from serialized specs.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Per-trial seed derived from a run seed; trials stay independent of execution order.
pub fn trial_seed(seed: u64, stream: u64, trial: u64) -> u64 {
    let mut bytes = [0u8; 24];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&stream.to_le_bytes());
    bytes[16..].copy_from_slice(&trial.to_le_bytes());
    fnv1a(&bytes)
}

/// `count` radii spaced geometrically from `r0` to `r1` inclusive.
pub fn geometric_radii(r0: f64, r1: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![r0];
    }
    let q = (r1 / r0).powf(1.0 / (count - 1) as f64);
    (0..count).map(|i| r0 * q.powi(i as i32)).collect()
}

/// Pairwise (tree) summation for reproducible, accurate reductions.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        len => {
            let mid = len / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii_are_geometric() {
        let r = geometric_radii(10.0, 80.0, 4);
        assert!((r[1] - 20.0).abs() < 1e-12 && (r[3] - 80.0).abs() < 1e-12);
    }

    #[test]
    fn infinity_round_trips() {
        #[derive(Serialize, Deserialize)]
        struct W {
            #[serde(with = "float_or_inf")]
            x: f64,
        }
        let s = serde_json::to_string(&W { x: f64::NEG_INFINITY }).unwrap();
        assert_eq!(s, r#"{"x":"-inf"}"#);
        let back: W = serde_json::from_str(&s).unwrap();
        assert_eq!(back.x, f64::NEG_INFINITY);
    }
}
