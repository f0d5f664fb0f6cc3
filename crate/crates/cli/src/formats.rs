//! Text and JSON file formats.
//!
//! * matrix: `rows cols` header followed by one 0/1 string per row
//! * bilinear form: `cyclic <length> <t>` header, then the rows of `P`, `R`
//!   and `Q` as 0/1 strings
//! * plan: JSON, see [`PlanFile`]
//! * schedule: the line format of [`Schedule::emit`]

use std::fs;
use std::path::Path;

use cfft_core::conv::validate_bilinear;
use cfft_core::{BilinearForm, BinaryMatrix, CfftPlan, FieldElement, FieldSpec, Permutation, PlanKind, Schedule};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

fn format_err(path: &Path, line: usize, msg: impl Into<String>) -> CliError {
    CliError::Format { path: path.to_path_buf(), line, msg: msg.into() }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Non-empty lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_bits(line: &str, width: usize) -> std::result::Result<Vec<usize>, String> {
    if line.len() != width {
        return Err(format!("expected {width} bits, found {}", line.len()));
    }
    line.bytes()
        .enumerate()
        .filter_map(|(i, b)| match b {
            b'0' => None,
            b'1' => Some(Ok(i)),
            _ => Some(Err(format!("bad bit `{}`", b as char))),
        })
        .collect()
}

fn bits_line(row: &[usize], width: usize) -> String {
    let mut s = vec![b'0'; width];
    for &c in row {
        s[c] = b'1';
    }
    String::from_utf8(s).expect("ascii")
}

fn take_rows<'a>(
    path: &Path,
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    count: usize,
    width: usize,
    last_line: usize,
) -> Result<Vec<Vec<usize>>> {
    (0..count)
        .map(|_| {
            let (no, line) =
                lines.next().ok_or_else(|| format_err(path, last_line, "unexpected end of file"))?;
            parse_bits(line, width).map_err(|m| format_err(path, no, m))
        })
        .collect()
}

fn header_numbers<const N: usize>(path: &Path, no: usize, fields: &[&str]) -> Result<[usize; N]> {
    if fields.len() != N {
        return Err(format_err(path, no, "malformed header"));
    }
    let mut out = [0; N];
    for (o, f) in out.iter_mut().zip(fields) {
        *o = f.parse().map_err(|_| format_err(path, no, format!("bad number `{f}`")))?;
    }
    Ok(out)
}

pub fn parse_matrix(path: &Path, text: &str) -> Result<BinaryMatrix> {
    let mut lines = content_lines(text);
    let (no, header) = lines.next().ok_or_else(|| format_err(path, 1, "empty matrix file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [rows, cols] = header_numbers::<2>(path, no, &fields)?;
    let last = text.lines().count();
    let data = take_rows(path, &mut lines, rows, cols, last)?;
    if let Some((no, _)) = lines.next() {
        return Err(format_err(path, no, "trailing rows"));
    }
    Ok(BinaryMatrix::from_rows(cols, data)?)
}

pub fn emit_matrix(m: &BinaryMatrix) -> String {
    let mut s = format!("{} {}\n", m.n_rows(), m.n_cols());
    for row in m.rows() {
        s.push_str(&bits_line(row, m.n_cols()));
        s.push('\n');
    }
    s
}

/// Field used to validate a form numerically: the smallest supported one
/// that contains `GF(2^length)`.
fn validation_field(length: usize) -> Result<FieldSpec> {
    let m = (length.max(2) as u32..=cfft_core::gf2m::MAX_DEGREE)
        .find(|m| *m as usize % length == 0)
        .unwrap_or(cfft_core::gf2m::MAX_DEGREE);
    Ok(FieldSpec::new(m)?)
}

/// Parses and validates a form file.
pub fn parse_form(path: &Path, text: &str) -> Result<BilinearForm> {
    let mut lines = content_lines(text);
    let (no, header) = lines.next().ok_or_else(|| format_err(path, 1, "empty form file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&"cyclic") {
        return Err(format_err(path, no, "expected `cyclic <length> <t>`"));
    }
    let [length, t] = header_numbers::<2>(path, no, &fields[1..])?;
    let last = text.lines().count();
    let p = take_rows(path, &mut lines, t, length, last)?;
    let r = take_rows(path, &mut lines, t, length, last)?;
    let q = take_rows(path, &mut lines, length, t, last)?;
    if let Some((no, _)) = lines.next() {
        return Err(format_err(path, no, "trailing rows"));
    }
    let form = BilinearForm::new_unchecked(
        BinaryMatrix::from_rows(length, p)?,
        BinaryMatrix::from_rows(length, r)?,
        BinaryMatrix::from_rows(t, q)?,
    )?;
    let field = validation_field(length)?;
    validate_bilinear(&form, &field).map_err(|cx| {
        format_err(path, 1, format!("form does not compute the cyclic correlation (output {})", cx.index))
    })?;
    Ok(form)
}

pub fn emit_form(form: &BilinearForm) -> String {
    let mut s = format!("cyclic {} {}\n", form.length(), form.t());
    for (m, width) in [(form.p(), form.length()), (form.r(), form.length()), (form.q(), form.t())] {
        for row in m.rows() {
            s.push_str(&bits_line(row, width));
            s.push('\n');
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub row_indices: Vec<Vec<usize>>,
}

impl From<&BinaryMatrix> for MatrixJson {
    fn from(m: &BinaryMatrix) -> Self {
        MatrixJson { rows: m.n_rows(), cols: m.n_cols(), row_indices: m.rows().to_vec() }
    }
}

impl TryFrom<MatrixJson> for BinaryMatrix {
    type Error = CliError;

    fn try_from(j: MatrixJson) -> Result<Self> {
        if j.row_indices.len() != j.rows {
            return Err(CliError::BadInput(format!(
                "matrix declares {} rows but lists {}",
                j.rows,
                j.row_indices.len()
            )));
        }
        Ok(BinaryMatrix::from_rows(j.cols, j.row_indices)?)
    }
}

/// Serialized plan. Constants are stored as exponents of the primitive
/// element, with `0` for the element 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFile {
    pub n: usize,
    pub m: u32,
    pub poly: u32,
    pub kind: String,
    pub pre: MatrixJson,
    pub post: MatrixJson,
    pub constants: Vec<u32>,
    pub in_perm: Vec<usize>,
    pub out_perm: Vec<usize>,
}

impl PlanFile {
    pub fn from_plan(plan: &CfftPlan) -> Self {
        PlanFile {
            n: plan.n(),
            m: plan.field.m(),
            poly: plan.field.poly(),
            kind: plan.kind.name().to_string(),
            pre: (&plan.pre).into(),
            post: (&plan.post).into(),
            constants: plan
                .constants
                .iter()
                .map(|&c| plan.field.log(c).expect("constants are nonzero"))
                .collect(),
            in_perm: plan.in_perm.as_slice().to_vec(),
            out_perm: plan.out_perm.as_slice().to_vec(),
        }
    }

    /// Rebuilds the plan and checks it against the naive DFT.
    pub fn into_plan(self) -> Result<CfftPlan> {
        let field = FieldSpec::with_poly(self.m, self.poly)?;
        if field.order() != self.n {
            return Err(CliError::BadInput(format!("n = {} does not match m = {}", self.n, self.m)));
        }
        let kind = PlanKind::from_name(&self.kind)
            .ok_or_else(|| CliError::BadInput(format!("unknown plan kind `{}`", self.kind)))?;
        let constants = self
            .constants
            .iter()
            .map(|&e| {
                if (e as usize) < field.order() {
                    Ok(field.alpha_pow(e as u64))
                } else {
                    Err(CliError::BadInput(format!("constant exponent {e} out of range")))
                }
            })
            .collect::<Result<Vec<FieldElement>>>()?;
        let plan = CfftPlan {
            kind,
            pre: self.pre.try_into()?,
            post: self.post.try_into()?,
            constants,
            in_perm: Permutation::new(self.in_perm)?,
            out_perm: Permutation::new(self.out_perm)?,
            field,
        };
        let t = plan.constants.len();
        let n = plan.n();
        for (found, expected) in [
            (plan.pre.n_cols(), n),
            (plan.pre.n_rows(), t),
            (plan.post.n_cols(), t),
            (plan.post.n_rows(), n),
            (plan.out_perm.len(), n),
        ] {
            if found != expected {
                return Err(cfft_core::Error::DimensionMismatch { expected, found }.into());
            }
        }
        plan.check_oracle(16, 0)?;
        Ok(plan)
    }
}

pub fn emit_plan(plan: &CfftPlan) -> String {
    let mut s = serde_json::to_string_pretty(&PlanFile::from_plan(plan)).expect("plain data");
    s.push('\n');
    s
}

pub fn parse_plan(path: &Path, text: &str) -> Result<CfftPlan> {
    let file: PlanFile = serde_json::from_str(text)
        .map_err(|e| format_err(path, e.line(), e.to_string()))?;
    file.into_plan()
}

pub fn parse_schedule(path: &Path, text: &str) -> Result<Schedule> {
    Schedule::parse(text).map_err(|e| match e {
        cfft_core::Error::Parse { line, msg } => format_err(path, line, msg),
        other => other.into(),
    })
}
