//! File formats.
//!
//! * CSV: comma separated, one header row, LF line endings, floats written
//!   with `{:.16e}` (17 significant digits, so values round-trip exactly).
//! * JSON sidecars: pretty-printed, no timestamps, so identical runs give
//!   byte-identical files.
//! * Binary snapshots, little-endian:
//!
//!   | offset | size | content                     |
//!   |--------|------|-----------------------------|
//!   | 0      | 8    | magic `GFBBMSNP`            |
//!   | 8      | 4    | format version (`u32`, = 1) |
//!   | 12     | 4    | samples per record `N`      |
//!   | 16     | ...  | records: `t: f64`, `N x f64`|

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Terminator, WriterBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{EvolutionTrace, Snapshot, TraceSample};
use crate::params::ModelParams;
use crate::solitary::SolitaryWave;
use crate::spectral::SpectralGrid;
use crate::stability::RegionCell;

pub const SNAPSHOT_MAGIC: [u8; 8] = *b"GFBBMSNP";
pub const SNAPSHOT_VERSION: u32 = 1;
pub const SNAPSHOT_HEADER_LEN: usize = 16;

pub const PROFILE_COLUMNS: [&str; 2] = ["x", "Q"];
pub const TRACE_COLUMNS: [&str; 7] = ["t", "peak", "x_peak", "orbital_distance", "I", "F", "H"];
pub const REGION_COLUMNS: [&str; 3] = ["alpha", "c", "verdict"];

/// Full-precision decimal form of a double.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Format(format!("{other:?}")),
        }
    } else {
        Error::Format(e.to_string())
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .from_writer(w)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes a header row and numeric rows.
pub fn write_numeric_csv<W, I>(w: W, header: &[&str], rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut out = csv_writer(w);
    out.write_record(header).map_err(csv_err)?;
    for row in rows {
        out.write_record(row.iter().map(|v| fmt_f64(*v)))
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a numeric CSV, checking the header against `expected`.
pub fn read_numeric_csv<R: Read>(r: R, expected: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Format(format!(
            "CSV header {:?} does not match expected {:?}",
            header.iter().collect::<Vec<_>>(),
            expected
        )));
    }
    let mut rows = Vec::new();
    let mut rec = StringRecord::new();
    let mut line = 1usize;
    while rdr.read_record(&mut rec).map_err(csv_err)? {
        line += 1;
        let row = rec
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Format(format!("line {line}: `{s}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let r = BufReader::new(File::open(path)?);
    serde_json::from_reader(r).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// JSON sidecar describing a profile CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileHeader {
    pub alpha: f64,
    pub p: u32,
    pub c: f64,
    pub residual: f64,
    pub iterations: usize,
    pub half_length: f64,
    pub n_points: usize,
}

impl ProfileHeader {
    pub fn from_wave(wave: &SolitaryWave) -> Self {
        Self {
            alpha: wave.params.alpha,
            p: wave.params.p,
            c: wave.params.c,
            residual: wave.residual,
            iterations: wave.iterations,
            half_length: wave.grid.half_length(),
            n_points: wave.grid.len(),
        }
    }
}

pub fn write_profile_csv<W: Write>(w: W, wave: &SolitaryWave) -> Result<()> {
    let rows = wave
        .grid
        .nodes()
        .iter()
        .zip(&wave.profile)
        .map(|(&x, &q)| vec![x, q]);
    write_numeric_csv(w, &PROFILE_COLUMNS, rows)
}

/// Writes the `(x, Q)` table and its JSON sidecar.
pub fn write_profile(csv_path: &Path, json_path: &Path, wave: &SolitaryWave) -> Result<()> {
    write_profile_csv(create(csv_path)?, wave)?;
    write_json(json_path, &ProfileHeader::from_wave(wave))
}

/// Rebuilds a wave from a profile table and its sidecar.
pub fn read_profile_from<R: Read>(r: R, header: &ProfileHeader) -> Result<SolitaryWave> {
    let params = ModelParams::new(header.alpha, header.p, header.c)?;
    let grid = SpectralGrid::new(header.half_length, header.n_points)?;
    let rows = read_numeric_csv(r, &PROFILE_COLUMNS)?;
    if rows.len() != grid.len() {
        return Err(Error::Format(format!(
            "profile has {} rows but the sidecar declares N = {}",
            rows.len(),
            grid.len()
        )));
    }
    let tol = 1e-12 * grid.half_length();
    let mut profile = Vec::with_capacity(rows.len());
    for (j, (row, &x)) in rows.iter().zip(grid.nodes()).enumerate() {
        if row.len() != 2 || (row[0] - x).abs() > tol {
            return Err(Error::Format(format!(
                "profile row {j} is not on the grid of L = {}, N = {}",
                grid.half_length(),
                grid.len()
            )));
        }
        profile.push(row[1]);
    }
    Ok(SolitaryWave {
        params,
        grid,
        profile,
        residual: header.residual,
        iterations: header.iterations,
        stabilizing_factor_history: Vec::new(),
        warnings: Vec::new(),
    })
}

pub fn read_profile(csv_path: &Path, json_path: &Path) -> Result<SolitaryWave> {
    let header: ProfileHeader = read_json(json_path)?;
    read_profile_from(BufReader::new(File::open(csv_path)?), &header)
}

pub fn write_trace_csv<W: Write>(w: W, trace: &EvolutionTrace) -> Result<()> {
    let rows = trace.samples.iter().map(|s| {
        vec![
            s.t,
            s.peak,
            s.x_peak,
            s.orbital_distance,
            s.mass,
            s.momentum,
            s.energy,
        ]
    });
    write_numeric_csv(w, &TRACE_COLUMNS, rows)
}

pub fn write_trace(path: &Path, trace: &EvolutionTrace) -> Result<()> {
    write_trace_csv(create(path)?, trace)
}

pub fn read_trace_csv<R: Read>(r: R) -> Result<Vec<TraceSample>> {
    read_numeric_csv(r, &TRACE_COLUMNS)?
        .into_iter()
        .map(|row| {
            let [t, peak, x_peak, orbital_distance, mass, momentum, energy] = row[..] else {
                return Err(Error::Format("trace row needs 7 columns".into()));
            };
            Ok(TraceSample {
                t,
                peak,
                x_peak,
                orbital_distance,
                mass,
                momentum,
                energy,
            })
        })
        .collect()
}

pub fn write_snapshots<W: Write>(mut w: W, n_points: usize, snapshots: &[Snapshot]) -> Result<()> {
    let n = u32::try_from(n_points)
        .map_err(|_| Error::Format(format!("N = {n_points} does not fit the snapshot header")))?;
    w.write_all(&SNAPSHOT_MAGIC)?;
    w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    w.write_all(&n.to_le_bytes())?;
    for (t, field) in snapshots {
        if field.len() != n_points {
            return Err(Error::Dimension {
                expected: n_points,
                got: field.len(),
            });
        }
        w.write_all(&t.to_le_bytes())?;
        for v in field {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshot_file(path: &Path, n_points: usize, snapshots: &[Snapshot]) -> Result<()> {
    write_snapshots(create(path)?, n_points, snapshots)
}

/// Reads a snapshot stream; returns `N` and the `(t, u)` records.
pub fn read_snapshots<R: Read>(mut r: R) -> Result<(usize, Vec<Snapshot>)> {
    let mut header = [0u8; SNAPSHOT_HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|_| Error::Format("snapshot file shorter than its 16-byte header".into()))?;
    if header[..8] != SNAPSHOT_MAGIC {
        return Err(Error::Format("not a snapshot file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes"));
    if version != SNAPSHOT_VERSION {
        return Err(Error::Format(format!(
            "snapshot version {version} is not supported (expected {SNAPSHOT_VERSION})"
        )));
    }
    let n = u32::from_le_bytes(header[12..16].try_into().expect("4 bytes")) as usize;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    let record = 8 * (n + 1);
    if n == 0 || body.len() % record != 0 {
        return Err(Error::Format(format!(
            "snapshot body of {} bytes is not a whole number of {record}-byte records",
            body.len()
        )));
    }
    let to_f64 = |b: &[u8]| f64::from_le_bytes(b.try_into().expect("8 bytes"));
    let records = body
        .chunks_exact(record)
        .map(|chunk| {
            let t = to_f64(&chunk[..8]);
            let field = chunk[8..].chunks_exact(8).map(to_f64).collect();
            (t, field)
        })
        .collect();
    Ok((n, records))
}

pub fn write_region_map_csv<W: Write>(w: W, cells: &[RegionCell]) -> Result<()> {
    let rows = cells.iter().map(|c| {
        [
            fmt_f64(c.alpha),
            fmt_f64(c.c),
            c.verdict.label().to_string(),
        ]
    });
    write_table(w, &REGION_COLUMNS, rows)
}

pub fn write_region_map(path: &Path, cells: &[RegionCell]) -> Result<()> {
    write_region_map_csv(create(path)?, cells)
}

/// Writes a header and pre-formatted text rows.
pub fn write_table<W, I, R>(w: W, header: &[&str], rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut out = csv_writer(w);
    out.write_record(header).map_err(csv_err)?;
    for row in rows {
        out.write_record(row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solitary::exact_solution;
    use crate::stability::Verdict;

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-1.5), "-1.5000000000000000e0");
        for v in [std::f64::consts::PI, 1e-300, -7.25e18, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn profile_round_trip() {
        let g = SpectralGrid::new(16.0, 64).unwrap();
        let w = exact_solution(1.5, &g).unwrap();
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &w).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,Q\n"));
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().count(), 65);
        let back = read_profile_from(&buf[..], &ProfileHeader::from_wave(&w)).unwrap();
        assert_eq!(back.profile, w.profile);
        assert_eq!(back.params, w.params);
    }

    #[test]
    fn profile_rejects_wrong_grid() {
        let g = SpectralGrid::new(16.0, 64).unwrap();
        let w = exact_solution(1.5, &g).unwrap();
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &w).unwrap();
        let mut h = ProfileHeader::from_wave(&w);
        h.half_length = 20.0;
        assert!(matches!(
            read_profile_from(&buf[..], &h),
            Err(Error::Format(_))
        ));
        h.half_length = 16.0;
        h.n_points = 128;
        assert!(matches!(
            read_profile_from(&buf[..], &h),
            Err(Error::Format(_))
        ));
        let bad = b"x,Q\n1.0,abc\n";
        assert!(matches!(
            read_numeric_csv(&bad[..], &PROFILE_COLUMNS),
            Err(Error::Format(_))
        ));
        let bad = b"a,b\n1.0,2.0\n";
        assert!(matches!(
            read_numeric_csv(&bad[..], &PROFILE_COLUMNS),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn snapshot_round_trip() {
        let snaps = vec![
            (0.0, vec![1.0, -2.0, 3.5]),
            (0.5, vec![f64::MIN_POSITIVE, 0.0, -0.0]),
        ];
        let mut buf = Vec::new();
        write_snapshots(&mut buf, 3, &snaps).unwrap();
        assert_eq!(&buf[..8], b"GFBBMSNP");
        assert_eq!(buf.len(), 16 + 2 * 4 * 8);
        let (n, back) = read_snapshots(&buf[..]).unwrap();
        assert_eq!(n, 3);
        assert_eq!(back, snaps);
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_snapshots(&bad[..]).is_err());
        let mut bad = buf.clone();
        bad[8] = 9;
        assert!(read_snapshots(&bad[..]).is_err());
        assert!(read_snapshots(&buf[..buf.len() - 3]).is_err());
        assert!(write_snapshots(Vec::new(), 2, &snaps).is_err());
    }

    #[test]
    fn region_map_format() {
        let cells = [RegionCell {
            alpha: 0.6,
            c: 1.1,
            verdict: Verdict::SpectrallyStable,
        }];
        let mut buf = Vec::new();
        write_region_map_csv(&mut buf, &cells).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "alpha,c,verdict\n5.9999999999999998e-1,1.1000000000000001e0,SpectrallyStable\n"
        );
    }

    #[test]
    fn trace_round_trip() {
        let s = TraceSample {
            t: 0.5,
            peak: 1.25,
            x_peak: 0.1,
            orbital_distance: 1e-3,
            mass: 2.0,
            momentum: 3.0,
            energy: -4.0,
        };
        let trace = EvolutionTrace {
            params: ModelParams::new(1.0, 1, 1.5).unwrap(),
            gamma: 1.1,
            dt: 5e-4,
            samples: vec![s, s],
            snapshots: Vec::new(),
        };
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &trace).unwrap();
        assert!(buf.starts_with(b"t,peak,x_peak,orbital_distance,I,F,H\n"));
        assert_eq!(read_trace_csv(&buf[..]).unwrap(), vec![s, s]);
    }
}
