//! Raw sample traces: the 8-byte magic `MMWB0001`, the observable count as a
//! little-endian `u64`, then little-endian `f64` values row-major
//! (sample × observable).

use std::io::{Read, Write};

use crate::McError;

pub const MAGIC: &[u8; 8] = b"MMWB0001";

pub fn write_trace<W: Write>(mut w: W, width: usize, rows: &[Vec<f64>]) -> Result<(), McError> {
    w.write_all(MAGIC)?;
    w.write_all(&(width as u64).to_le_bytes())?;
    for row in rows {
        if row.len() != width {
            return Err(McError::Trace(format!(
                "row of length {} in a trace of width {width}",
                row.len()
            )));
        }
        for x in row {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Returns the observable count and the rows.
pub fn read_trace<R: Read>(mut r: R) -> Result<(usize, Vec<Vec<f64>>), McError> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[..8] != MAGIC {
        return Err(McError::Trace("bad magic".into()));
    }
    let width = u64::from_le_bytes(header[8..].try_into().expect("8 bytes")) as usize;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if width == 0 {
        return if body.is_empty() {
            Ok((0, Vec::new()))
        } else {
            Err(McError::Trace("data after a zero-width header".into()))
        };
    }
    if body.len() % (8 * width) != 0 {
        return Err(McError::Trace(format!(
            "{} data bytes do not fill rows of width {width}",
            body.len()
        )));
    }
    let rows = body
        .chunks_exact(8 * width)
        .map(|row| {
            row.chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect()
        })
        .collect();
    Ok((width, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let mut buf = Vec::new();
        write_trace(&mut buf, 2, &[vec![1.0, -2.5]]).unwrap();
        assert_eq!(buf.len(), 16 + 16);
        assert_eq!(&buf[..8], b"MMWB0001");
        assert_eq!(&buf[8..16], &[2, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(&buf[16..24], &1.0f64.to_le_bytes());
        assert!(read_trace(&buf[..20]).is_err());
        assert!(write_trace(Vec::new(), 3, &[vec![1.0]]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(width in 1usize..5, rows in 0usize..20, seed in any::<u64>()) {
            let data: Vec<Vec<f64>> = (0..rows)
                .map(|r| (0..width).map(|c| ((seed ^ (r * 31 + c) as u64) as f64).sin()).collect())
                .collect();
            let mut buf = Vec::new();
            write_trace(&mut buf, width, &data).unwrap();
            let (w, back) = read_trace(buf.as_slice()).unwrap();
            prop_assert_eq!(w, width);
            prop_assert_eq!(back, data);
        }
    }
}
