//! JSON output with every float written to 17 significant digits.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

/// Compact JSON formatter that writes floats as `d.dddddddddddddddde±x`
/// (17 significant digits) and non-finite floats as `null`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PreciseFloats;

impl Formatter for PreciseFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes `value` with [`PreciseFloats`] and a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, PreciseFloats);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let s = to_json_string(&vec![0.1, -2.5e-300, 0.0, f64::NAN]).unwrap();
        assert_eq!(
            s,
            "[1.0000000000000001e-1,-2.5000000000000000e-300,0.0000000000000000e0,null]\n"
        );
        let back: Vec<Option<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(back[0], Some(0.1));
        assert_eq!(back[1], Some(-2.5e-300));
    }

    #[test]
    fn reserialization_is_stable() {
        let v = serde_json::json!({"a": [1.0 / 3.0, 2.0], "b": null, "c": 5});
        let s1 = to_json_string(&v).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&s1).unwrap();
        assert_eq!(s1, to_json_string(&parsed).unwrap());
    }
}
