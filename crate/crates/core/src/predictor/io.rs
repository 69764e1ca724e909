//! Plain-text weight files.
//!
//! ```text
//! csi-twin-predictor 1
//! recurrent
//! real <M> <M_h> <M_o>
//! w <M values>          (M_h lines, row j is w_j)
//! v <M_h values>        (M_o lines)
//! imag <M> <M_h> <M_o>
//! ...
//! ```
//!
//! A persistence predictor is the header followed by `persistence`.
//! Values are written in shortest round-trip form, so reading a file back
//! reproduces every weight bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use super::network::RnnWeights;
use super::state::Predictor;
use crate::error::{Error, Result};

const MAGIC: &str = "csi-twin-predictor 1";

pub fn encode_predictor(p: &Predictor) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    match p {
        Predictor::Persistence => out.push_str("persistence\n"),
        Predictor::Recurrent { real, imag } => {
            out.push_str("recurrent\n");
            encode_network(&mut out, "real", real);
            encode_network(&mut out, "imag", imag);
        }
    }
    out
}

fn encode_network(out: &mut String, name: &str, w: &RnnWeights) {
    let _ = writeln!(out, "{name} {} {} {}", w.inputs(), w.hidden(), w.outputs());
    for (tag, data, width) in [("w", w.hidden_weights(), w.inputs()), ("v", w.output_weights(), w.hidden())] {
        for row in data.chunks(width) {
            out.push_str(tag);
            for x in row {
                let _ = write!(out, " {x:?}");
            }
            out.push('\n');
        }
    }
}

pub fn decode_predictor(text: &str) -> Result<Predictor> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let mut next = |what: &str| lines.next().ok_or_else(|| Error::Parse { line: 0, message: format!("unexpected end of file, expected {what}") });
    let (n, header) = next("header")?;
    if header != MAGIC {
        return Err(Error::Parse {
            line: n,
            message: format!("expected header `{MAGIC}`"),
        });
    }
    let (n, kind) = next("predictor kind")?;
    let predictor = match kind {
        "persistence" => Predictor::Persistence,
        "recurrent" => {
            let real = decode_network(&mut next, "real")?;
            let imag = decode_network(&mut next, "imag")?;
            Predictor::Recurrent { real, imag }
        }
        other => {
            return Err(Error::Parse {
                line: n,
                message: format!("unknown predictor kind `{other}`"),
            })
        }
    };
    if let Ok((n, _)) = next("") {
        return Err(Error::Parse {
            line: n,
            message: "trailing content".into(),
        });
    }
    Ok(predictor)
}

fn decode_network<'a>(next: &mut impl FnMut(&str) -> Result<(usize, &'a str)>, name: &str) -> Result<RnnWeights> {
    let (n, line) = next(name)?;
    let fields: Vec<&str> = line.split_whitespace().collect();
    let parse_dim = |s: &str| {
        s.parse::<usize>().map_err(|e| Error::Parse {
            line: n,
            message: format!("bad dimension `{s}`: {e}"),
        })
    };
    if fields.len() != 4 || fields[0] != name {
        return Err(Error::Parse {
            line: n,
            message: format!("expected `{name} <inputs> <hidden> <outputs>`"),
        });
    }
    let (inputs, hidden, outputs) = (parse_dim(fields[1])?, parse_dim(fields[2])?, parse_dim(fields[3])?);
    let mut read_rows = |tag: &str, count: usize, width: usize| -> Result<Vec<f64>> {
        let mut values = Vec::with_capacity(count * width);
        for _ in 0..count {
            let (n, line) = next(tag)?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(tag) {
                return Err(Error::Parse {
                    line: n,
                    message: format!("expected a `{tag}` row"),
                });
            }
            let row: Vec<f64> = parts
                .map(|s| {
                    s.parse::<f64>().map_err(|e| Error::Parse {
                        line: n,
                        message: format!("bad weight `{s}`: {e}"),
                    })
                })
                .collect::<Result<_>>()?;
            if row.len() != width {
                return Err(Error::Parse {
                    line: n,
                    message: format!("expected {width} values, found {}", row.len()),
                });
            }
            values.extend(row);
        }
        Ok(values)
    };
    let w = read_rows("w", hidden, inputs)?;
    let v = read_rows("v", outputs, hidden)?;
    RnnWeights::from_parts(inputs, hidden, outputs, w, v).map_err(|e| e.context(format!("network `{name}`")))
}

pub fn write_predictor(path: impl AsRef<Path>, p: &Predictor) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_predictor(p)).map_err(|e| Error::io(path, e))
}

pub fn read_predictor(path: impl AsRef<Path>) -> Result<Predictor> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_predictor(&text).map_err(|e| e.context(path.display().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = seeded(9);
        let p = Predictor::Recurrent {
            real: RnnWeights::init_uniform(6, 16, 2, &mut rng),
            imag: RnnWeights::init_uniform(6, 16, 2, &mut rng),
        };
        let back = decode_predictor(&encode_predictor(&p)).unwrap();
        assert!(back.bit_eq(&p));
        let hold = decode_predictor(&encode_predictor(&Predictor::Persistence)).unwrap();
        assert_eq!(hold, Predictor::Persistence);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.txt");
        let p = Predictor::Recurrent {
            real: RnnWeights::init_uniform(4, 3, 1, &mut seeded(1)),
            imag: RnnWeights::zeros(4, 3, 1),
        };
        write_predictor(&path, &p).unwrap();
        assert!(read_predictor(&path).unwrap().bit_eq(&p));
        assert!(matches!(read_predictor(dir.path().join("missing")), Err(Error::Io { .. })));
    }

    #[test]
    fn malformed_files_rejected() {
        assert!(matches!(decode_predictor("nope\n"), Err(Error::Parse { line: 1, .. })));
        let text = format!("{MAGIC}\nrecurrent\nreal 2 1 1\nw 0.5\n");
        assert!(matches!(decode_predictor(&text), Err(Error::Parse { line: 4, .. })));
        let text = format!("{MAGIC}\npersistence\nextra\n");
        assert!(decode_predictor(&text).is_err());
    }
}
