//! Serialization: JSON with 17 significant digits, CSV grids and the
//! timestamp sidecar.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use zerofree::{FuncExprF64, SampleGrid};

use crate::CliError;

/// `d.dddddddddddddddde±x`, enough digits to round-trip any `f64`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON with every float written by [`fmt17`].
struct SigFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for SigFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt17(v).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<S: Serialize>(value: &S) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub const CSV_HEADER: [&str; 5] = ["re_z", "im_z", "re_f", "im_f", "abs_f"];

/// Values of `f` on every grid sample, boundary first.
pub fn write_grid_csv<W: Write>(f: &FuncExprF64, grid: &SampleGrid<f64>, out: W) -> Result<(), CliError> {
    let points: Vec<_> = grid.points().collect();
    let values = zerofree::funcs::eval_many(f, &points)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for (z, v) in points.iter().zip(&values) {
        w.write_record([fmt17(z.re), fmt17(z.im), fmt17(v.re), fmt17(v.im), fmt17(v.norm())])?;
    }
    w.flush()?;
    Ok(())
}

/// `report.json` gets `report.meta.json`.
pub fn sidecar_path(report: &Path) -> PathBuf {
    let stem = report.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    report.with_file_name(format!("{stem}.meta.json"))
}

#[derive(Debug, Serialize)]
pub struct RunMeta {
    pub started: String,
    pub finished: String,
    pub elapsed_seconds: f64,
    pub threads: usize,
    pub version: &'static str,
}

impl RunMeta {
    pub fn new(started: chrono::DateTime<chrono::Utc>, finished: chrono::DateTime<chrono::Utc>) -> Self {
        let elapsed = (finished - started).to_std().map(|d| d.as_secs_f64()).unwrap_or(0.0);
        Self {
            started: started.to_rfc3339(),
            finished: finished.to_rfc3339(),
            elapsed_seconds: elapsed,
            threads: rayon::current_num_threads(),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use zerofree::{ComplexF64, RegionF64};

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, -0.0, f64::MIN_POSITIVE, f64::MAX] {
            let s = fmt17(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
            let digits = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(digits.len(), 17);
        }
    }

    #[test]
    fn json_uses_seventeen_digits() {
        let s = to_json(&serde_json::json!({"x": 0.1, "n": 3, "z": ComplexF64::new(1.0, -0.5)})).unwrap();
        assert!(s.contains("\"x\": 1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"n\": 3"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["z"][1].as_f64(), Some(-0.5));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let grid = zerofree::geometry::boundary_grid(&RegionF64::Chain(zerofree::geometry::chain_discs(1).unwrap()), 4.0)
            .unwrap();
        let mut buf = Vec::new();
        write_grid_csv(&FuncExprF64::identity(), &grid, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("re_z,im_z,re_f,im_f,abs_f"));
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(first[0], first[2]);
        assert_eq!(first[4], first[0].hypot(first[1]));
        assert_eq!(text.lines().count(), grid.len() + 1);
    }

    #[test]
    fn sidecar_sits_next_to_report() {
        assert_eq!(sidecar_path(Path::new("out/r.json")), PathBuf::from("out/r.meta.json"));
    }
}
