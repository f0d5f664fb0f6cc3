use alloc::string::String;
use core::fmt;

/// Errors raised by the algorithmic core.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Extension degree outside the supported range.
    UnsupportedDegree(u32),
    /// The polynomial is not primitive of the requested degree.
    NotPrimitive { m: u32, poly: u32 },
    /// Inversion of the zero element.
    ZeroInverse,
    /// The subfield degree does not divide the extension degree.
    NotSubfield { m: u32, sub: u32 },
    /// A field element lies outside the span of the basis.
    OutsideSubfield,
    /// Operand dimensions disagree.
    DimensionMismatch { expected: usize, found: usize },
    /// A bilinear form failed validation.
    InvalidForm(String),
    /// Convolution lengths passed to Agarwal-Cooley share a factor.
    NotCoprime(usize, usize),
    /// A constant vector entry evaluated to zero.
    ZeroConstant(usize),
    /// No bilinear form is available for a coset size.
    MissingForm(usize),
    /// A binary matrix that had to be inverted is singular.
    Singular,
    /// A plan disagreed with the naive DFT.
    OracleMismatch { input: usize, output: usize },
    /// A transform precondition did not hold.
    Precondition(&'static str),
    /// A schedule listing could not be parsed.
    Parse { line: usize, msg: String },
    /// A schedule step used an operand before defining it.
    UndefinedOperand(usize),
    /// The schedule contains multiplications but the lane type cannot scale.
    UnsupportedMultiply,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnsupportedDegree(m) => write!(f, "extension degree {m} is outside 2..=10"),
            Error::NotPrimitive { m, poly } => {
                write!(f, "polynomial {poly:#x} is not primitive of degree {m}")
            }
            Error::ZeroInverse => f.write_str("zero has no multiplicative inverse"),
            Error::NotSubfield { m, sub } => {
                write!(f, "GF(2^{sub}) is not a subfield of GF(2^{m})")
            }
            Error::OutsideSubfield => f.write_str("element is outside the span of the basis"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidForm(msg) => write!(f, "invalid bilinear form: {msg}"),
            Error::NotCoprime(a, b) => write!(f, "lengths {a} and {b} are not coprime"),
            Error::ZeroConstant(i) => write!(f, "constant vector entry {i} is zero"),
            Error::MissingForm(len) => write!(f, "no bilinear form for length {len}"),
            Error::Singular => f.write_str("matrix is singular over GF(2)"),
            Error::OracleMismatch { input, output } => write!(
                f,
                "plan disagrees with the naive DFT at output {output} for unit input {input}"
            ),
            Error::Precondition(what) => write!(f, "precondition violated: {what}"),
            Error::Parse { line, msg } => write!(f, "line {line}: {msg}"),
            Error::UndefinedOperand(step) => write!(f, "step {step} reads an undefined slot"),
            Error::UnsupportedMultiply => {
                f.write_str("schedule multiplies by constants but the lanes are symbolic")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
