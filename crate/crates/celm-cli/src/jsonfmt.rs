//! JSON emission with 17-significant-digit floats.
//!
//! Reports are replay artifacts, so every f64 is printed with enough
//! digits to round-trip exactly; the default shortest-representation
//! printer would make numerically equal reruns diff against old files
//! whenever the shortest form changes shape.

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};
use std::io;

struct SigDigits<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for SigDigits<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Pretty-printed JSON with all floats at 17 significant digits.
pub fn to_json(value: &impl Serialize) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let formatter = SigDigits {
        inner: PrettyFormatter::new(),
    };
    let mut serializer = Serializer::with_formatter(&mut out, formatter);
    value.serialize(&mut serializer)?;
    Ok(String::from_utf8(out).expect("serializer emits utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Sample {
        x: f64,
        n: u64,
        v: Vec<f64>,
    }

    #[test]
    fn floats_carry_seventeen_significant_digits() {
        let s = Sample {
            x: 1.0 / 3.0,
            n: 42,
            v: vec![0.1, 99.04761904761905],
        };
        let json = to_json(&s).unwrap();
        assert!(json.contains("3.3333333333333331e-1"), "{json}");
        assert!(json.contains("9.9047619047619051e1"), "{json}");
        assert!(json.contains("\"n\": 42"), "{json}");
    }

    #[test]
    fn output_round_trips_exactly() {
        let s = Sample {
            x: std::f64::consts::PI,
            n: 7,
            v: vec![1e-300, 2.5e17, -0.0],
        };
        let back: Sample = serde_json::from_str(&to_json(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.x.to_bits(), s.x.to_bits());
    }
}
