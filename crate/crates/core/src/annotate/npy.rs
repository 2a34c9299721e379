//! NPY version 1.0 for little-endian `f64` arrays.
//!
//! Layout: magic `\x93NUMPY`, version bytes `1 0`, a little-endian `u16`
//! header length, then an ASCII Python dict literal padded with spaces and
//! a final newline so the data starts on a 64-byte boundary. The header
//! leaves room for the first axis to grow, as numpy does.

use crate::ingest::{SignalMatrix, N_LEADS, N_SAMPLES};

use super::{AnnotateError, Result};

pub const MAGIC: &[u8; 6] = b"\x93NUMPY";
const ALIGN: usize = 64;
const GROWTH_AXIS_MAX_DIGITS: usize = 21;
/// Magic, version and header-length field.
const PREAMBLE: usize = 10;

/// Size of an emitted signals file: 128 header bytes plus 12 x 5000 `f64`.
pub const SIGNALS_FILE_BYTES: usize = 128 + N_LEADS * N_SAMPLES * 8;

fn shape_repr(shape: &[usize]) -> String {
    match shape {
        [n] => format!("({n},)"),
        _ => format!("({})", shape.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ")),
    }
}

/// Encodes a C-ordered `f64` array.
pub fn encode_f64(shape: &[usize], data: &[f64]) -> Result<Vec<u8>> {
    if shape.iter().product::<usize>() != data.len() {
        return Err(AnnotateError::ShapeMismatch {
            expected: shape.to_vec(),
            got: vec![data.len()],
        });
    }
    let dict = format!("{{'descr': '<f8', 'fortran_order': False, 'shape': {}, }}", shape_repr(shape));
    let first = shape.first().map_or(1, |d| d.to_string().len());
    let unpadded = PREAMBLE + dict.len() + GROWTH_AXIS_MAX_DIGITS - first + 1;
    let total = unpadded.div_ceil(ALIGN) * ALIGN;
    let header_len = total - PREAMBLE;
    let header_len_u16 = u16::try_from(header_len).map_err(|_| AnnotateError::Npy("header too long".into()))?;

    let mut out = Vec::with_capacity(total + data.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&header_len_u16.to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out.resize(total - 1, b' ');
    out.push(b'\n');
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Signal file bytes for a 12 x 5000 record.
pub fn emit_signals(signals: &SignalMatrix) -> Result<Vec<u8>> {
    let got = [N_LEADS, signals.n_samples()];
    if got != [N_LEADS, N_SAMPLES] {
        return Err(AnnotateError::ShapeMismatch {
            expected: vec![N_LEADS, N_SAMPLES],
            got: got.to_vec(),
        });
    }
    if signals.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(AnnotateError::NonFinite);
    }
    encode_f64(&got, signals.as_slice())
}

/// A decoded array, C order.
#[derive(Debug, Clone, PartialEq)]
pub struct NpyArray {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

fn bad(reason: impl Into<String>) -> AnnotateError {
    AnnotateError::Npy(reason.into())
}

/// Value of `'key': ` in the header dict, up to the next top-level comma.
fn dict_value<'a>(dict: &'a str, key: &str) -> Result<&'a str> {
    let pat = format!("'{key}':");
    let start = dict.find(&pat).ok_or_else(|| bad(format!("missing key {key}")))? + pat.len();
    let rest = dict[start..].trim_start();
    let end = if rest.starts_with('(') {
        rest.find(')').ok_or_else(|| bad("unterminated shape"))? + 1
    } else {
        rest.find([',', '}']).ok_or_else(|| bad("unterminated value"))?
    };
    Ok(rest[..end].trim())
}

fn parse_shape(s: &str) -> Result<Vec<usize>> {
    let inner = s
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| bad("shape is not a tuple"))?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| bad(format!("bad dimension {t:?}"))))
        .collect()
}

/// Decodes a version 1.0 or 2.0 file holding little-endian `f64` in C order.
pub fn decode_f64(bytes: &[u8]) -> Result<NpyArray> {
    if bytes.len() < PREAMBLE || &bytes[..6] != MAGIC {
        return Err(bad("missing magic"));
    }
    let (header_start, header_len): (usize, usize) = match (bytes[6], bytes[7]) {
        (1, 0) => (10, usize::from(u16::from_le_bytes([bytes[8], bytes[9]]))),
        (2, 0) => {
            if bytes.len() < 12 {
                return Err(bad("truncated preamble"));
            }
            (12, u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]) as usize)
        }
        (major, minor) => return Err(bad(format!("unsupported version {major}.{minor}"))),
    };
    let data_start = header_start
        .checked_add(header_len)
        .filter(|&end| end <= bytes.len())
        .ok_or_else(|| bad("truncated header"))?;
    let dict = std::str::from_utf8(&bytes[header_start..data_start]).map_err(|_| bad("header is not UTF-8"))?;
    let dict = dict.trim_end();
    if !(dict.starts_with('{') && dict.ends_with('}')) {
        return Err(bad("header is not a dict"));
    }
    let descr = dict_value(dict, "descr")?;
    if descr != "'<f8'" {
        return Err(bad(format!("unsupported dtype {descr}")));
    }
    if dict_value(dict, "fortran_order")? != "False" {
        return Err(bad("Fortran order is not supported"));
    }
    let shape = parse_shape(dict_value(dict, "shape")?)?;
    let count = shape
        .iter()
        .try_fold(1usize, |acc, d| acc.checked_mul(*d))
        .ok_or_else(|| bad("shape overflows"))?;
    let payload = &bytes[data_start..];
    if Some(payload.len()) != count.checked_mul(8) {
        return Err(bad(format!("expected {count} values, found {} bytes", payload.len())));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok(NpyArray { shape, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Bytes written by numpy.save(np.arange(6, dtype='<f8').reshape(2, 3)).
    fn numpy_reference() -> Vec<u8> {
        let mut v = b"\x93NUMPY\x01\x00v\x00{'descr': '<f8', 'fortran_order': False, 'shape': (2, 3), }".to_vec();
        v.resize(127, b' ');
        v.push(b'\n');
        for x in 0..6 {
            v.extend_from_slice(&(x as f64).to_le_bytes());
        }
        v
    }

    #[test]
    fn matches_numpy_bytes() {
        let data: Vec<f64> = (0..6).map(f64::from).collect();
        assert_eq!(encode_f64(&[2, 3], &data).unwrap(), numpy_reference());
    }

    #[test]
    fn signals_file_size_and_magic() {
        let m = SignalMatrix::from_rows(vec![vec![0.0; N_SAMPLES]; N_LEADS]);
        let bytes = emit_signals(&m).unwrap();
        assert_eq!(bytes.len(), SIGNALS_FILE_BYTES);
        assert_eq!(bytes.len(), 480_128);
        assert_eq!(&bytes[..6], &[0x93, 0x4E, 0x55, 0x4D, 0x50, 0x59]);
        assert_eq!(&bytes[6..8], &[1, 0]);
        assert!(bytes[128..].iter().all(|b| *b == 0));
        let header = std::str::from_utf8(&bytes[10..128]).unwrap();
        assert!(header.contains("'shape': (12, 5000)"));
    }

    #[test]
    fn round_trip() {
        let m = SignalMatrix::from_rows(
            (0..N_LEADS)
                .map(|k| (0..N_SAMPLES).map(|i| (i as f64 * 1e-3 + k as f64).sin() * 3.7).collect())
                .collect(),
        );
        let arr = decode_f64(&emit_signals(&m).unwrap()).unwrap();
        assert_eq!(arr.shape, vec![12, 5000]);
        assert_eq!(arr.data, m.as_slice());
    }

    #[test]
    fn wrong_shape() {
        let m = SignalMatrix::from_rows(vec![vec![0.0; 100]; N_LEADS]);
        assert!(matches!(emit_signals(&m), Err(AnnotateError::ShapeMismatch { .. })));
        assert!(encode_f64(&[2, 2], &[0.0; 3]).is_err());
    }

    #[test]
    fn decoder_rejects_bad_input() {
        let good = numpy_reference();
        let mut wrong_dtype = good.clone();
        wrong_dtype[21..24].copy_from_slice(b"<f4");
        let mut fortran = good.clone();
        let pos = fortran.windows(5).position(|w| w == b"False").unwrap();
        fortran[pos..pos + 5].copy_from_slice(b"True ");
        for bytes in [&good[..5], &good[..100], &good[..good.len() - 1], &wrong_dtype[..], &fortran[..]] {
            assert!(decode_f64(bytes).is_err());
        }
        assert_eq!(decode_f64(&good).unwrap().data, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn one_dimensional_and_scalar_shapes() {
        let bytes = encode_f64(&[3], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(bytes.len(), 128 + 24);
        assert!(std::str::from_utf8(&bytes[10..128]).unwrap().contains("(3,)"));
        assert_eq!(decode_f64(&bytes).unwrap().shape, vec![3]);
    }
}
