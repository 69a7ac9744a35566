//! Binary container for problem instances.
//!
//! Layout (all integers little-endian, floats as IEEE-754 little-endian
//! bit patterns, so round trips are bit-exact):
//!
//! ```text
//! offset  size        field
//! 0       8           magic "OBCSINST"
//! 8       4           format version (u32, currently 1)
//! 12      8           n (u64) - signal dimension
//! 20      8           m (u64) - number of measurements
//! 28      8           snr_eta (f64, linear scale)
//! 36      8           seed (u64)
//! 44      4           generator name length L (u32)
//! 48      L           generator name (UTF-8)
//! .       8*m*n       matrix entries, row-major f64
//! .       m           signs, one byte each: 0x01 = +1, 0xFF = -1
//! .       1           truth flag: 0 = absent, 1 = present
//! .       8 + 8*n     if present: sparsity s (u64) then dense truth (f64)
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{OneBitObservations, ProblemInstance, SensingMatrix, SparseSignal};
use crate::rng::GENERATOR_NAME;

const MAGIC: &[u8; 8] = b"OBCSINST";
const VERSION: u32 = 1;

/// Writes `instance` to `path` in the documented binary layout.
pub fn write_instance(instance: &ProblemInstance, path: &Path) -> Result<()> {
    instance.validate()?;
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_instance_to(instance, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_instance_to(instance: &ProblemInstance, w: &mut impl Write) -> Result<()> {
    let n = instance.matrix.cols() as u64;
    let m = instance.matrix.rows() as u64;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&m.to_le_bytes())?;
    w.write_all(&instance.snr_eta.to_le_bytes())?;
    w.write_all(&instance.seed.to_le_bytes())?;
    let name = GENERATOR_NAME.as_bytes();
    w.write_all(&(name.len() as u32).to_le_bytes())?;
    w.write_all(name)?;
    for &v in instance.matrix.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    let sign_bytes: Vec<u8> = instance
        .observations
        .signs()
        .iter()
        .map(|&s| s as u8)
        .collect();
    w.write_all(&sign_bytes)?;
    match &instance.truth {
        None => w.write_all(&[0u8])?,
        Some(truth) => {
            w.write_all(&[1u8])?;
            w.write_all(&(truth.sparsity() as u64).to_le_bytes())?;
            for &v in truth.values() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

/// Reads an instance previously written by [`write_instance`].
pub fn read_instance(path: &Path) -> Result<ProblemInstance> {
    let file = File::open(path)?;
    let mut r = BufReader::new(file);
    read_instance_from(&mut r)
}

pub fn read_instance_from(r: &mut impl Read) -> Result<ProblemInstance> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic; not an instance file".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {version}"
        )));
    }
    let n = read_u64(r)? as usize;
    let m = read_u64(r)? as usize;
    let snr_eta = read_f64(r)?;
    let seed = read_u64(r)?;
    let name_len = read_u32(r)? as usize;
    if name_len > 4096 {
        return Err(Error::Format(format!(
            "unreasonable generator name length {name_len}"
        )));
    }
    let mut name = vec![0u8; name_len];
    r.read_exact(&mut name)?;
    String::from_utf8(name).map_err(|_| Error::Format("generator name is not UTF-8".into()))?;

    // Cap the declared matrix size before allocating, so a forged header
    // cannot request an absurd buffer.
    const MAX_ELEMENTS: usize = 1 << 28; // 2 GiB of f64
    let elements = match (n, m, m.checked_mul(n)) {
        (0, _, _) | (_, 0, _) | (_, _, None) => {
            return Err(Error::Format(format!("bad dimensions n={n}, m={m}")));
        }
        (_, _, Some(e)) if e > MAX_ELEMENTS => {
            return Err(Error::Format(format!(
                "declared matrix size {e} exceeds the reader limit"
            )));
        }
        (_, _, Some(e)) => e,
    };
    let mut data = vec![0.0f64; elements];
    for v in data.iter_mut() {
        *v = read_f64(r)?;
    }
    let matrix = SensingMatrix::new(m, n, data)?;

    let mut sign_bytes = vec![0u8; m];
    r.read_exact(&mut sign_bytes)?;
    let signs: Vec<i8> = sign_bytes.iter().map(|&b| b as i8).collect();
    let observations = OneBitObservations::new(signs)
        .map_err(|_| Error::Format("sign bytes must be 0x01 or 0xFF".into()))?;

    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let truth = match flag[0] {
        0 => None,
        1 => {
            let s = read_u64(r)? as usize;
            let mut values = vec![0.0f64; n];
            for v in values.iter_mut() {
                *v = read_f64(r)?;
            }
            let support: Vec<usize> = values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, _)| i)
                .collect();
            if support.len() != s {
                return Err(Error::Format(format!(
                    "truth declares sparsity {s} but has {} nonzeros",
                    support.len()
                )));
            }
            Some(SparseSignal::new(n, support, values)?)
        }
        other => return Err(Error::Format(format!("bad truth flag {other}"))),
    };

    let instance = ProblemInstance {
        matrix,
        observations,
        truth,
        snr_eta,
        seed,
    };
    instance.validate()?;
    Ok(instance)
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let instance = ProblemInstance::generate(12, 20, 3, 10.0, 4242).unwrap();
        let mut buf = Vec::new();
        write_instance_to(&instance, &mut buf).unwrap();
        let back = read_instance_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back.matrix, instance.matrix);
        assert_eq!(back.observations, instance.observations);
        assert_eq!(
            back.truth.as_ref().unwrap(),
            instance.truth.as_ref().unwrap()
        );
        assert_eq!(back.snr_eta.to_bits(), instance.snr_eta.to_bits());
        assert_eq!(back.seed, instance.seed);

        // Serializing the read-back instance reproduces the same bytes.
        let mut buf2 = Vec::new();
        write_instance_to(&back, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn round_trip_without_truth() {
        let mut instance = ProblemInstance::generate(6, 9, 2, 1.0, 7).unwrap();
        instance.truth = None;
        let mut buf = Vec::new();
        write_instance_to(&instance, &mut buf).unwrap();
        let back = read_instance_from(&mut buf.as_slice()).unwrap();
        assert!(back.truth.is_none());
        assert_eq!(back.matrix, instance.matrix);
    }

    #[test]
    fn rejects_corrupted_magic() {
        let instance = ProblemInstance::generate(4, 5, 1, 1.0, 1).unwrap();
        let mut buf = Vec::new();
        write_instance_to(&instance, &mut buf).unwrap();
        buf[0] ^= 0xFF;
        assert!(matches!(
            read_instance_from(&mut buf.as_slice()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn rejects_truncated_file() {
        let instance = ProblemInstance::generate(4, 5, 1, 1.0, 1).unwrap();
        let mut buf = Vec::new();
        write_instance_to(&instance, &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_instance_from(&mut buf.as_slice()).is_err());
    }
}
