//! Model checkpoint container.
//!
//! ```text
//! CONSEG-BILSTM-v1
//! config <TrainConfig as one-line JSON, or null>
//! shape input=<n> hidden=<n> layers=<n> classes=2
//! tensors <count>
//! <name> <rows> <cols>          (one line per tensor, storage order)
//! data
//! <all tensors as little-endian f64, row-major, same order>
//! ```

use super::params::{BilstmParams, NetworkShape, NUM_CLASSES};
use super::train::TrainConfig;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &str = "CONSEG-BILSTM-v1";

pub fn write_checkpoint(params: &BilstmParams, config: Option<&TrainConfig>) -> Vec<u8> {
    let shape = params.shape();
    let mut out = String::new();
    out.push_str(CHECKPOINT_MAGIC);
    out.push('\n');
    let config = config
        .map(|c| serde_json::to_string(c).expect("config serializes"))
        .unwrap_or_else(|| "null".into());
    out.push_str(&format!("config {config}\n"));
    out.push_str(&format!(
        "shape input={} hidden={} layers={} classes={}\n",
        shape.input_size, shape.hidden_size, shape.num_layers, NUM_CLASSES
    ));
    let names = params.tensor_names();
    out.push_str(&format!("tensors {}\n", names.len()));
    for (name, (r, c)) in names.iter().zip(params.tensor_dims()) {
        out.push_str(&format!("{name} {r} {c}\n"));
    }
    out.push_str("data\n");
    let mut bytes = out.into_bytes();
    for t in params.tensors() {
        for v in t {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    bytes
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

struct Lines<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<&'a str> {
        let rest = &self.bytes[self.pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad("truncated header"))?;
        self.pos += end + 1;
        std::str::from_utf8(&rest[..end]).map_err(|_| bad("header is not UTF-8"))
    }
}

fn field(token: Option<&str>, key: &str) -> Result<usize> {
    token
        .and_then(|t| t.strip_prefix(key))
        .and_then(|t| t.strip_prefix('='))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad(format!("malformed shape field `{key}`")))
}

/// Parses a checkpoint, returning the parameters and the echoed config.
pub fn read_checkpoint(bytes: &[u8]) -> Result<(BilstmParams, Option<TrainConfig>)> {
    let mut lines = Lines { bytes, pos: 0 };
    if lines.next_line()? != CHECKPOINT_MAGIC {
        return Err(bad(format!("missing magic `{CHECKPOINT_MAGIC}`")));
    }
    let config_json = lines
        .next_line()?
        .strip_prefix("config ")
        .ok_or_else(|| bad("missing config line"))?;
    let config: Option<TrainConfig> =
        serde_json::from_str(config_json).map_err(|e| bad(format!("config: {e}")))?;

    let shape_line = lines.next_line()?;
    let mut tokens = shape_line
        .strip_prefix("shape ")
        .ok_or_else(|| bad("missing shape line"))?
        .split(' ');
    let shape = NetworkShape {
        input_size: field(tokens.next(), "input")?,
        hidden_size: field(tokens.next(), "hidden")?,
        num_layers: field(tokens.next(), "layers")?,
    };
    if field(tokens.next(), "classes")? != NUM_CLASSES {
        return Err(bad("only two-class heads are supported"));
    }
    if shape.input_size > 1 << 20 || shape.hidden_size > 1 << 16 || shape.num_layers > 1 << 8 {
        return Err(bad("implausible network shape"));
    }
    let mut params = BilstmParams::zeros(shape)?;

    let count: usize = lines
        .next_line()?
        .strip_prefix("tensors ")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| bad("missing tensor count"))?;
    let names = params.tensor_names();
    let dims = params.tensor_dims();
    if count != names.len() {
        return Err(bad(format!("expected {} tensors, found {count}", names.len())));
    }
    for (name, (r, c)) in names.iter().zip(&dims) {
        let line = lines.next_line()?;
        let expected = format!("{name} {r} {c}");
        if line != expected {
            return Err(bad(format!("tensor header `{line}`, expected `{expected}`")));
        }
    }
    if lines.next_line()? != "data" {
        return Err(bad("missing data marker"));
    }
    let data = &bytes[lines.pos..];
    let total = params.num_parameters();
    if data.len() != total * 8 {
        return Err(bad(format!(
            "expected {} data bytes, found {}",
            total * 8,
            data.len()
        )));
    }
    let mut values = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    for t in params.tensors_mut() {
        for slot in t.iter_mut() {
            *slot = values.next().expect("length checked");
        }
    }
    if !params.is_finite() {
        return Err(bad("non-finite parameter values"));
    }
    Ok((params, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample() -> BilstmParams {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        BilstmParams::init(NetworkShape { input_size: 5, hidden_size: 3, num_layers: 2 }, &mut rng).unwrap()
    }

    #[test]
    fn round_trip() {
        let p = sample();
        let cfg = TrainConfig { hidden_size: 3, num_layers: 2, ..TrainConfig::default() };
        let bytes = write_checkpoint(&p, Some(&cfg));
        assert!(bytes.starts_with(b"CONSEG-BILSTM-v1\nconfig {"));
        let (q, c) = read_checkpoint(&bytes).unwrap();
        assert_eq!(p, q);
        assert_eq!(c, Some(cfg));
        let (_, none) = read_checkpoint(&write_checkpoint(&p, None)).unwrap();
        assert_eq!(none, None);
    }

    #[test]
    fn rejects_damage() {
        let bytes = write_checkpoint(&sample(), None);
        assert!(read_checkpoint(&bytes[..bytes.len() - 1]).is_err());
        assert!(read_checkpoint(&bytes[1..]).is_err());
        assert!(read_checkpoint(b"").is_err());
        let text = String::from_utf8_lossy(&bytes).replace("hidden=3", "hidden=4");
        assert!(read_checkpoint(text.as_bytes()).is_err());
        // every truncation fails cleanly
        for n in 0..bytes.len() {
            assert!(read_checkpoint(&bytes[..n]).is_err());
        }
    }
}
