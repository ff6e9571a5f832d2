//! Versioned text checkpoints for trained parameters and fitted mappings.
//! Values are written with 17 significant digits so a save/load round
//! trip reproduces every matrix bit-for-bit.

use std::io::{BufRead, Write};

use crate::blse::{BlseParams, ModelKind};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mapping::MappingMatrix;
use crate::targeted::{TargetedParams, Variant};

const MAGIC: &str = "xlsent-checkpoint v1";

/// Any artifact the checkpoint format can hold.
#[derive(Debug, Clone, PartialEq)]
pub enum Checkpoint {
    Sentence(BlseParams),
    Targeted(TargetedParams),
    Mapping(MappingMatrix),
}

impl Checkpoint {
    pub fn as_sentence(&self) -> Result<&BlseParams> {
        match self {
            Checkpoint::Sentence(p) => Ok(p),
            other => Err(Error::Argument(format!(
                "expected a sentence-level checkpoint, found {}",
                other.kind_name()
            ))),
        }
    }

    pub fn as_targeted(&self) -> Result<&TargetedParams> {
        match self {
            Checkpoint::Targeted(p) => Ok(p),
            other => Err(Error::Argument(format!(
                "expected a targeted checkpoint, found {}",
                other.kind_name()
            ))),
        }
    }

    pub fn as_mapping(&self) -> Result<&MappingMatrix> {
        match self {
            Checkpoint::Mapping(m) => Ok(m),
            other => Err(Error::Argument(format!(
                "expected a mapping checkpoint, found {}",
                other.kind_name()
            ))),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Checkpoint::Sentence(p) => match p.kind {
                ModelKind::Sentence => "sentence",
                ModelKind::NoMprime => "no_mprime",
                ModelKind::NoProjection => "no_projection",
            },
            Checkpoint::Targeted(_) => "targeted",
            Checkpoint::Mapping(_) => "mapping",
        }
    }
}

fn write_matrix<W: Write>(writer: &mut W, name: &str, m: &Matrix) -> Result<()> {
    writeln!(writer, "matrix {name} {} {}", m.rows(), m.cols())?;
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(writer, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn save_params<W: Write>(writer: &mut W, params: &BlseParams) -> Result<()> {
    writeln!(writer, "{MAGIC}")?;
    let kind = match params.kind {
        ModelKind::Sentence => "sentence",
        ModelKind::NoMprime => "no_mprime",
        ModelKind::NoProjection => "no_projection",
    };
    writeln!(writer, "kind {kind}")?;
    writeln!(
        writer,
        "dims {} {} {} {}",
        params.d(),
        params.dprime(),
        params.h(),
        params.o()
    )?;
    write_matrix(writer, "M", &params.m)?;
    write_matrix(writer, "Mprime", &params.mprime)?;
    write_matrix(writer, "P", &params.p)?;
    Ok(())
}

pub fn save_targeted<W: Write>(writer: &mut W, params: &TargetedParams) -> Result<()> {
    writeln!(writer, "{MAGIC}")?;
    writeln!(writer, "kind targeted")?;
    writeln!(writer, "variant {}", params.variant.as_str())?;
    writeln!(
        writer,
        "dims {} {} {} {}",
        params.base.d(),
        params.base.dprime(),
        params.base.h(),
        params.base.o()
    )?;
    write_matrix(writer, "M", &params.base.m)?;
    write_matrix(writer, "Mprime", &params.base.mprime)?;
    write_matrix(writer, "P", &params.base.p)?;
    write_matrix(writer, "Tclf", &params.tclf)?;
    writeln!(
        writer,
        "vector shared_target {}",
        params.shared_target.len()
    )?;
    let row: Vec<String> = params
        .shared_target
        .iter()
        .map(|v| format!("{v:.17e}"))
        .collect();
    writeln!(writer, "{}", row.join(" "))?;
    Ok(())
}

pub fn save_mapping<W: Write>(writer: &mut W, mapping: &MappingMatrix) -> Result<()> {
    writeln!(writer, "{MAGIC}")?;
    writeln!(writer, "kind mapping")?;
    writeln!(writer, "residual {:.17e}", mapping.fit_residual)?;
    write_matrix(writer, "W", &mapping.w)?;
    Ok(())
}

struct Lines<R: BufRead> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<String> {
        match self.inner.next() {
            Some(line) => {
                self.number += 1;
                Ok(line?)
            }
            None => Err(Error::format_at(
                self.number + 1,
                "unexpected end of checkpoint",
            )),
        }
    }
}

fn read_matrix<R: BufRead>(lines: &mut Lines<R>, expect_name: &str) -> Result<Matrix> {
    let header = lines.next_line()?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "matrix" || fields[1] != expect_name {
        return Err(Error::format_at(
            lines.number,
            format!("expected `matrix {expect_name} <rows> <cols>`, found {header:?}"),
        ));
    }
    let rows: usize = fields[2]
        .parse()
        .map_err(|_| Error::format_at(lines.number, "bad row count"))?;
    let cols: usize = fields[3]
        .parse()
        .map_err(|_| Error::format_at(lines.number, "bad column count"))?;
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let line = lines.next_line()?;
        let mut count = 0usize;
        for field in line.split_whitespace() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::format_at(lines.number, format!("bad value {field:?}")))?;
            data.push(v);
            count += 1;
        }
        if count != cols {
            return Err(Error::format_at(
                lines.number,
                format!("expected {cols} values, found {count}"),
            ));
        }
    }
    Matrix::from_vec(rows, cols, data)
}

/// Loads any checkpoint written by the savers above.
pub fn load_checkpoint<R: BufRead>(reader: R) -> Result<Checkpoint> {
    let mut lines = Lines {
        inner: reader.lines(),
        number: 0,
    };
    let magic = lines.next_line()?;
    if magic.trim() != MAGIC {
        return Err(Error::format_at(
            1,
            format!("not an xlsent checkpoint: {magic:?}"),
        ));
    }
    let kind_line = lines.next_line()?;
    let kind = kind_line
        .strip_prefix("kind ")
        .ok_or_else(|| Error::format_at(lines.number, "missing kind"))?
        .trim()
        .to_string();

    if kind == "mapping" {
        let residual_line = lines.next_line()?;
        let fit_residual: f64 = residual_line
            .strip_prefix("residual ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::format_at(lines.number, "missing residual"))?;
        let w = read_matrix(&mut lines, "W")?;
        return Ok(Checkpoint::Mapping(MappingMatrix { w, fit_residual }));
    }

    let variant = if kind == "targeted" {
        let line = lines.next_line()?;
        let name = line
            .strip_prefix("variant ")
            .ok_or_else(|| Error::format_at(lines.number, "missing variant"))?;
        Some(Variant::parse(name.trim())?)
    } else {
        None
    };

    let dims_line = lines.next_line()?;
    let dims: Vec<usize> = dims_line
        .strip_prefix("dims ")
        .map(|s| {
            s.split_whitespace()
                .filter_map(|v| v.parse().ok())
                .collect()
        })
        .unwrap_or_default();
    if dims.len() != 4 {
        return Err(Error::format_at(
            lines.number,
            "expected `dims d dprime h o`",
        ));
    }
    let (d, dprime, h, o) = (dims[0], dims[1], dims[2], dims[3]);

    let m = read_matrix(&mut lines, "M")?;
    let mprime = read_matrix(&mut lines, "Mprime")?;
    let p = read_matrix(&mut lines, "P")?;
    if m.shape() != (d, h) || mprime.shape() != (dprime, h) || p.shape() != (h, o) {
        return Err(Error::Format(
            "matrix shapes disagree with checkpoint dims".into(),
        ));
    }

    match kind.as_str() {
        "sentence" | "no_mprime" | "no_projection" => {
            let kind = match kind.as_str() {
                "sentence" => ModelKind::Sentence,
                "no_mprime" => ModelKind::NoMprime,
                _ => ModelKind::NoProjection,
            };
            Ok(Checkpoint::Sentence(BlseParams { kind, m, mprime, p }))
        }
        "targeted" => {
            let tclf = read_matrix(&mut lines, "Tclf")?;
            if tclf.shape() != (3 * h, o) {
                return Err(Error::Format("Tclf shape disagrees with dims".into()));
            }
            let header = lines.next_line()?;
            let len: usize = header
                .strip_prefix("vector shared_target ")
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::format_at(lines.number, "missing shared_target"))?;
            let line = lines.next_line()?;
            let shared_target: Vec<f64> = line
                .split_whitespace()
                .map(|v| {
                    v.parse()
                        .map_err(|_| Error::format_at(lines.number, format!("bad value {v:?}")))
                })
                .collect::<Result<_>>()?;
            if shared_target.len() != len {
                return Err(Error::format_at(
                    lines.number,
                    "shared_target length mismatch",
                ));
            }
            Ok(Checkpoint::Targeted(TargetedParams {
                base: BlseParams {
                    kind: ModelKind::Sentence,
                    m,
                    mprime,
                    p,
                },
                tclf,
                variant: variant.expect("targeted kind sets a variant"),
                shared_target,
            }))
        }
        other => Err(Error::Format(format!("unknown checkpoint kind {other:?}"))),
    }
}
