//! Binary sketch files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "SSKB" | version: u8 | alpha: f64 | k: u32 | master_seed: u64
//! then per record: label_len: u32 | label: UTF-8 | ⌈k/8⌉ sketch bytes
//! ```
//!
//! Sketch bytes store bit `j` at bit `j % 8` of byte `j / 8`. Records run to
//! the end of the file.
//!
//! Stream updates are CSV with header `t,i,increment` and 1-based `i`.

use std::io::{ErrorKind, Read, Write};

use serde::Deserialize;

use crate::error::{Error, Result};

use super::{SignSketch, SketchConfig};

pub const SKETCH_MAGIC: [u8; 4] = *b"SSKB";
pub const SKETCH_VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SketchRecord {
    pub label: String,
    pub sketch: SignSketch,
}

pub fn write_sketch_file(
    mut writer: impl Write,
    config: &SketchConfig,
    records: &[SketchRecord],
) -> Result<()> {
    writer.write_all(&SKETCH_MAGIC)?;
    writer.write_all(&[SKETCH_VERSION])?;
    writer.write_all(&config.alpha().to_le_bytes())?;
    writer.write_all(&(config.k() as u32).to_le_bytes())?;
    writer.write_all(&config.master_seed().to_le_bytes())?;
    for rec in records {
        rec.sketch.config().check_same(config)?;
        let label = rec.label.as_bytes();
        let len = u32::try_from(label.len())
            .map_err(|_| Error::Format("label longer than 4 GiB".into()))?;
        writer.write_all(&len.to_le_bytes())?;
        writer.write_all(label)?;
        writer.write_all(&rec.sketch.to_bytes())?;
    }
    Ok(())
}

fn read_exact_or(reader: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    reader.read_exact(buf).map_err(|e| match e.kind() {
        ErrorKind::UnexpectedEof => Error::Format(format!("truncated {what}")),
        _ => Error::Io(e),
    })
}

/// Read a whole sketch file.
pub fn read_sketch_file(mut reader: impl Read) -> Result<(SketchConfig, Vec<SketchRecord>)> {
    let mut header = [0u8; 4 + 1 + 8 + 4 + 8];
    read_exact_or(&mut reader, &mut header, "header")?;
    if header[..4] != SKETCH_MAGIC {
        return Err(Error::Format("bad magic, not a sketch file".into()));
    }
    if header[4] != SKETCH_VERSION {
        return Err(Error::Format(format!("unsupported version {}", header[4])));
    }
    let alpha = f64::from_le_bytes(header[5..13].try_into().unwrap());
    let k = u32::from_le_bytes(header[13..17].try_into().unwrap()) as usize;
    let seed = u64::from_le_bytes(header[17..25].try_into().unwrap());
    let config = SketchConfig::new(k, alpha, seed)
        .map_err(|e| Error::Format(format!("bad header: {e}")))?;

    let nbytes = k.div_ceil(8);
    let mut records = Vec::new();
    loop {
        let mut len = [0u8; 4];
        // A clean end of file is only allowed between records.
        match reader.read(&mut len[..1])? {
            0 => break,
            _ => read_exact_or(&mut reader, &mut len[1..], "record length")?,
        }
        let mut label = vec![0u8; u32::from_le_bytes(len) as usize];
        read_exact_or(&mut reader, &mut label, "label")?;
        let label = String::from_utf8(label)
            .map_err(|_| Error::Format(format!("record {} label is not UTF-8", records.len())))?;
        let mut bytes = vec![0u8; nbytes];
        read_exact_or(&mut reader, &mut bytes, "sketch bits")?;
        records.push(SketchRecord {
            label,
            sketch: SignSketch::from_bytes(config, &bytes)?,
        });
    }
    Ok((config, records))
}

/// One turnstile stream element with a 0-based coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamUpdate {
    pub t: u64,
    pub index: usize,
    pub increment: f64,
}

#[derive(Deserialize)]
struct UpdateRow {
    t: u64,
    i: usize,
    increment: f64,
}

/// Read an updates CSV.
pub fn read_updates(reader: impl Read) -> Result<Vec<StreamUpdate>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "i", "increment"] {
        return Err(Error::parse(1, "expected header t,i,increment"));
    }
    let mut out = Vec::new();
    for (n, row) in rdr.deserialize::<UpdateRow>().enumerate() {
        let line = n + 2;
        let row = row.map_err(|e| Error::parse(line, e.to_string()))?;
        if row.i == 0 {
            return Err(Error::parse(line, "coordinates are 1-based"));
        }
        if !row.increment.is_finite() {
            return Err(Error::parse(line, "increment is not finite"));
        }
        out.push(StreamUpdate {
            t: row.t,
            index: row.i - 1,
            increment: row.increment,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_exact() {
        let config = SketchConfig::new(10, 1.0, 0x0102030405060708).unwrap();
        let s = SignSketch::from_bits(config, &[true, true, false, false, false, false, false, false, false, true])
            .unwrap();
        let mut buf = Vec::new();
        write_sketch_file(
            &mut buf,
            &config,
            &[SketchRecord {
                label: "ab".into(),
                sketch: s.clone(),
            }],
        )
        .unwrap();
        let mut expected = b"SSKB\x01".to_vec();
        expected.extend_from_slice(&1.0f64.to_le_bytes());
        expected.extend_from_slice(&[10, 0, 0, 0]);
        expected.extend_from_slice(&[8, 7, 6, 5, 4, 3, 2, 1]);
        expected.extend_from_slice(&[2, 0, 0, 0, b'a', b'b', 0b11, 0b10]);
        assert_eq!(buf, expected);

        let (c, recs) = read_sketch_file(buf.as_slice()).unwrap();
        assert_eq!(c, config);
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].sketch, s);
    }

    #[test]
    fn rejects_corruption() {
        let config = SketchConfig::new(16, 2.0, 5).unwrap();
        let s = SignSketch::from_bits(config, &[true; 16]).unwrap();
        let mut buf = Vec::new();
        let rec = SketchRecord { label: "x".into(), sketch: s };
        write_sketch_file(&mut buf, &config, &[rec.clone(), rec]).unwrap();

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_sketch_file(bad.as_slice()).is_err());
        let mut bad = buf.clone();
        bad[4] = 9;
        assert!(read_sketch_file(bad.as_slice()).is_err());
        let truncated = &buf[..buf.len() - 1];
        assert!(matches!(read_sketch_file(truncated), Err(Error::Format(_))));
        assert!(read_sketch_file(&buf[..10]).is_err());

        let other = SketchConfig::new(16, 2.0, 6).unwrap();
        let mism = SketchRecord {
            label: "y".into(),
            sketch: SignSketch::from_bits(other, &[false; 16]).unwrap(),
        };
        assert!(write_sketch_file(Vec::new(), &config, &[mism]).is_err());
    }

    #[test]
    fn updates_csv() {
        let ok = "t,i,increment\n1,3,2.5\n2, 1 ,-1\n";
        let ups = read_updates(ok.as_bytes()).unwrap();
        assert_eq!(
            ups,
            vec![
                StreamUpdate { t: 1, index: 2, increment: 2.5 },
                StreamUpdate { t: 2, index: 0, increment: -1.0 },
            ]
        );
        assert!(read_updates("a,b,c\n1,1,1\n".as_bytes()).is_err());
        assert!(matches!(
            read_updates("t,i,increment\n1,0,1\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(read_updates("t,i,increment\n1,2,x\n".as_bytes()).is_err());
    }
}
