//! Plain-text checkpoint format for [`QNetwork`] parameters.
//!
//! The format is line-oriented and versioned:
//!
//! ```text
//! qnet-v1
//! layers: 24 64 64 10
//! activations: relu relu identity
//! w0: <24*64 floats, row-major>
//! b0: <64 floats>
//! w1: ...
//! b1: ...
//! w2: ...
//! b2: ...
//! ```
//!
//! - Line 1 is the literal version header `qnet-v1`.
//! - `layers:` lists the dimension chain; k layers have k+1 entries.
//! - `activations:` lists one of `relu`/`identity` per layer; the last must
//!   be `identity`.
//! - Then, per layer in order, a `w<k>:` line with `output_dim * input_dim`
//!   weights (row-major: row i holds the weights feeding output unit i) and a
//!   `b<k>:` line with `output_dim` biases.
//! - Floats are space-separated decimals at full round-trip precision, so
//!   `load(save(net))` reproduces parameters bit-exactly.
//!
//! Adam moments are deliberately not persisted; a loaded network starts with
//! a fresh optimizer state.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::NnError;

use super::{Activation, Layer, LayerSpec, QNetwork};

const HEADER: &str = "qnet-v1";

/// Serializes the network to the `qnet-v1` text format.
pub fn write_checkpoint<W: Write>(net: &QNetwork, mut w: W) -> Result<(), NnError> {
    writeln!(w, "{HEADER}")?;
    let mut dims = vec![net.input_dim().to_string()];
    dims.extend(net.layers().iter().map(|l| l.spec.output_dim.to_string()));
    writeln!(w, "layers: {}", dims.join(" "))?;
    let acts: Vec<&str> = net.layers().iter().map(|l| l.spec.activation.name()).collect();
    writeln!(w, "activations: {}", acts.join(" "))?;
    for (k, layer) in net.layers().iter().enumerate() {
        write_tensor(&mut w, &format!("w{k}"), &layer.weights)?;
        write_tensor(&mut w, &format!("b{k}"), &layer.biases)?;
    }
    Ok(())
}

/// Parses a `qnet-v1` checkpoint.
pub fn read_checkpoint<R: Read>(r: R) -> Result<QNetwork, NnError> {
    let mut lines = BufReader::new(r).lines().enumerate();

    let header = next_line(&mut lines)?;
    if header.1.trim() != HEADER {
        return Err(NnError::VersionMismatch {
            expected: HEADER,
            found: header.1.trim().to_string(),
        });
    }

    let (line_no, layers_line) = next_line(&mut lines)?;
    let dims = parse_prefixed(&layers_line, "layers:", line_no)?
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>().map_err(|_| NnError::Format {
                line: line_no + 1,
                message: format!("bad layer dimension '{t}'"),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if dims.len() < 2 {
        return Err(NnError::Format {
            line: line_no + 1,
            message: "need at least two dimensions".into(),
        });
    }

    let (line_no, acts_line) = next_line(&mut lines)?;
    let activations = parse_prefixed(&acts_line, "activations:", line_no)?
        .split_whitespace()
        .map(|t| match t {
            "relu" => Ok(Activation::Relu),
            "identity" => Ok(Activation::Identity),
            other => Err(NnError::Format {
                line: line_no + 1,
                message: format!("unknown activation '{other}'"),
            }),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if activations.len() != dims.len() - 1 {
        return Err(NnError::Format {
            line: line_no + 1,
            message: format!(
                "expected {} activations, found {}",
                dims.len() - 1,
                activations.len()
            ),
        });
    }

    let mut layers = Vec::with_capacity(activations.len());
    for (k, &activation) in activations.iter().enumerate() {
        let spec = LayerSpec::new(dims[k], dims[k + 1], activation);
        let weights = read_tensor(
            &mut lines,
            &format!("w{k}"),
            spec.input_dim * spec.output_dim,
        )?;
        let biases = read_tensor(&mut lines, &format!("b{k}"), spec.output_dim)?;
        layers.push(Layer {
            spec,
            weights,
            biases,
        });
    }
    QNetwork::from_layers(layers)
}

/// Writes the checkpoint to a file.
pub fn save(net: &QNetwork, path: &Path) -> Result<(), NnError> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_checkpoint(net, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Loads a checkpoint from a file.
pub fn load(path: &Path) -> Result<QNetwork, NnError> {
    read_checkpoint(File::open(path)?)
}

fn write_tensor<W: Write>(w: &mut W, label: &str, values: &[f64]) -> Result<(), NnError> {
    write!(w, "{label}:")?;
    for v in values {
        write!(w, " {v}")?;
    }
    writeln!(w)?;
    Ok(())
}

type NumberedLines<'a, R> = std::iter::Enumerate<std::io::Lines<BufReader<R>>>;

fn next_line<R: Read>(lines: &mut NumberedLines<R>) -> Result<(usize, String), NnError> {
    match lines.next() {
        Some((n, Ok(line))) => Ok((n, line)),
        Some((n, Err(e))) => Err(NnError::Format {
            line: n + 1,
            message: e.to_string(),
        }),
        None => Err(NnError::Format {
            line: 0,
            message: "unexpected end of file".into(),
        }),
    }
}

fn parse_prefixed<'a>(line: &'a str, prefix: &str, line_no: usize) -> Result<&'a str, NnError> {
    line.strip_prefix(prefix).ok_or_else(|| NnError::Format {
        line: line_no + 1,
        message: format!("expected line starting with '{prefix}'"),
    })
}

fn read_tensor<R: Read>(
    lines: &mut NumberedLines<R>,
    label: &str,
    expected_len: usize,
) -> Result<Vec<f64>, NnError> {
    let (line_no, line) = next_line(lines)?;
    let body = parse_prefixed(&line, &format!("{label}:"), line_no)?;
    let values = body
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>().map_err(|_| NnError::Format {
                line: line_no + 1,
                message: format!("bad float '{t}' in tensor {label}"),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != expected_len {
        return Err(NnError::Format {
            line: line_no + 1,
            message: format!(
                "tensor {label} has {} values, expected {expected_len}",
                values.len()
            ),
        });
    }
    Ok(values)
}
