//! Binary field snapshot format and CSV emitters.
//!
//! Layout of a `.crns` file, all integers and floats little-endian:
//!
//! ```text
//! magic   5 bytes  "CRNS1"
//! n_modes u32
//! L       f64
//! fields  u32
//! data    fields * 3 * n^3 coefficients, each two f64 (re, im)
//! ```
//!
//! Coefficients are serialized per field, component-major, in lexicographic
//! order of the integer mode triple `(k1, k2, k3)` with each component
//! running over `[-n/2, n/2)`. The dealias fraction is a processing
//! parameter, not data; readers get the default rule.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::SnapshotError;
use crate::field::SpectralField;
use crate::grid::GridSpec;

pub const MAGIC: &[u8; 5] = b"CRNS1";

/// Serialize fields (which must share a grid) into the snapshot format.
pub fn write_fields<W: Write>(
    mut w: W,
    grid: &GridSpec,
    fields: &[&SpectralField],
) -> Result<(), SnapshotError> {
    w.write_all(MAGIC)?;
    w.write_all(&(grid.n() as u32).to_le_bytes())?;
    w.write_all(&grid.box_length().to_le_bytes())?;
    w.write_all(&(fields.len() as u32).to_le_bytes())?;
    let n = grid.n() as i64;
    let mut buf = Vec::with_capacity(16 * grid.point_count());
    for field in fields {
        for c in 0..3 {
            buf.clear();
            for k1 in -n / 2..n / 2 {
                for k2 in -n / 2..n / 2 {
                    for k3 in -n / 2..n / 2 {
                        let m = grid.mode_index(
                            grid.index_of_frequency(k1),
                            grid.index_of_frequency(k2),
                            grid.index_of_frequency(k3),
                        );
                        let z = field.coeff(c, m);
                        buf.extend_from_slice(&z.re.to_le_bytes());
                        buf.extend_from_slice(&z.im.to_le_bytes());
                    }
                }
            }
            w.write_all(&buf)?;
        }
    }
    Ok(())
}

/// Read every field in a snapshot stream.
pub fn read_fields<R: Read>(mut r: R) -> Result<Vec<SpectralField>, SnapshotError> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SnapshotError::BadMagic(magic));
    }
    let mut u32_buf = [0u8; 4];
    let mut f64_buf = [0u8; 8];
    r.read_exact(&mut u32_buf)?;
    let n_modes = u32::from_le_bytes(u32_buf) as usize;
    r.read_exact(&mut f64_buf)?;
    let box_length = f64::from_le_bytes(f64_buf);
    r.read_exact(&mut u32_buf)?;
    let count = u32::from_le_bytes(u32_buf) as usize;
    let grid = GridSpec::new(n_modes, box_length)?;
    let n3 = grid.point_count();
    let expected = count * 3 * n3 * 16;
    let mut data = Vec::with_capacity(expected);
    r.read_to_end(&mut data)?;
    if data.len() < expected {
        return Err(SnapshotError::Truncated {
            expected,
            got: data.len(),
        });
    }
    let n = n_modes as i64;
    let mut fields = Vec::with_capacity(count);
    let mut offset = 0usize;
    for _ in 0..count {
        let mut coeffs = vec![Complex64::default(); 3 * n3];
        for c in 0..3 {
            for k1 in -n / 2..n / 2 {
                for k2 in -n / 2..n / 2 {
                    for k3 in -n / 2..n / 2 {
                        let re = f64::from_le_bytes(data[offset..offset + 8].try_into().unwrap());
                        let im =
                            f64::from_le_bytes(data[offset + 8..offset + 16].try_into().unwrap());
                        offset += 16;
                        let m = grid.mode_index(
                            grid.index_of_frequency(k1),
                            grid.index_of_frequency(k2),
                            grid.index_of_frequency(k3),
                        );
                        coeffs[c * n3 + m] = Complex64::new(re, im);
                    }
                }
            }
        }
        fields.push(
            SpectralField::from_coeffs(grid, coeffs)
                .expect("length correct by construction"),
        );
    }
    Ok(fields)
}

pub fn write_fields_to_path<P: AsRef<Path>>(
    path: P,
    grid: &GridSpec,
    fields: &[&SpectralField],
) -> Result<(), SnapshotError> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_fields(&mut w, grid, fields)?;
    w.flush()?;
    Ok(())
}

pub fn read_fields_from_path<P: AsRef<Path>>(path: P) -> Result<Vec<SpectralField>, SnapshotError> {
    let file = std::fs::File::open(path)?;
    read_fields(std::io::BufReader::new(file))
}

/// Norm table as CSV, one row per record.
pub fn records_to_csv(records: &[crate::criticality::NormRecord]) -> String {
    let mut out = String::from(crate::criticality::NormRecord::CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
