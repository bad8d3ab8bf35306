//! JSON zero-sequence files.

use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{GeneratorTag, Zero, ZeroSequence};
use crate::error::{Error, Result};
use crate::geometry::DiscPoint;
use crate::scalar::Real;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZeroRecord {
    re: f64,
    im: f64,
    mult: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZeroFile {
    zeros: Vec<ZeroRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<String>,
}

pub fn to_json<T: Real>(seq: &ZeroSequence<T>) -> String {
    let file = ZeroFile {
        zeros: seq
            .zeros()
            .iter()
            .map(|z| {
                let v = z.position.value();
                ZeroRecord { re: v.re.as_f64(), im: v.im.as_f64(), mult: z.multiplicity }
            })
            .collect(),
        generator: seq.generator().map(ToString::to_string),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("zero file serialises");
    out.push('\n');
    out
}

pub fn from_json<T: Real>(text: &str) -> Result<ZeroSequence<T>> {
    let file: ZeroFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let mut zeros = Vec::with_capacity(file.zeros.len());
    for (i, rec) in file.zeros.iter().enumerate() {
        if !(rec.re * rec.re + rec.im * rec.im < 1.0) {
            return Err(Error::Format(format!("zero {i} does not lie in the open disc")));
        }
        let point = DiscPoint::new(Complex::new(T::lit(rec.re), T::lit(rec.im)))
            .map_err(|_| Error::Format(format!("zero {i} does not lie in the open disc")))?;
        zeros.push(Zero::new(point, rec.mult).map_err(|e| Error::Format(format!("zero {i}: {e}")))?);
    }
    Ok(match file.generator {
        Some(tag) => ZeroSequence::tagged(zeros, tag.parse::<GeneratorTag>()?),
        None => ZeroSequence::finite(zeros),
    })
}

pub fn write_file<T: Real>(seq: &ZeroSequence<T>, path: &Path) -> Result<()> {
    crate::report::write_atomic(path, to_json(seq).as_bytes())
}

pub fn read_file<T: Real>(path: &Path) -> Result<ZeroSequence<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blaschke::{gen_exponential, Placement};

    #[test]
    fn round_trip_keeps_tag_and_tail() {
        let seq = gen_exponential::<f64>(2, 6, Placement::Jittered, 9);
        let back: ZeroSequence<f64> = from_json(&to_json(&seq)).unwrap();
        assert_eq!(back, seq);
    }

    #[test]
    fn rejects_points_outside_and_zero_multiplicity() {
        assert!(from_json::<f64>(r#"{"zeros":[{"re":1.0,"im":0.0,"mult":1}]}"#).is_err());
        assert!(from_json::<f64>(r#"{"zeros":[{"re":0.6,"im":0.8,"mult":1}]}"#).is_err());
        assert!(from_json::<f64>(r#"{"zeros":[{"re":0.1,"im":0.0,"mult":0}]}"#).is_err());
        assert!(from_json::<f64>(r#"{"zeros":[{"re":0.1,"im":0.0,"mult":1,"x":2}]}"#).is_err());
        let seq = from_json::<f64>(r#"{"zeros":[{"re":0.5,"im":0.0,"mult":3}]}"#).unwrap();
        assert_eq!(seq.count_with_multiplicity(), 3);
        assert!(!seq.is_infinite());
    }
}
