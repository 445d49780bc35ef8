//! Read-traffic model for CSR SpMV in binary64 versus binary32.
//!
//! With `w` nonzeros per row, binary64 SpMV with no reuse of `x` reads
//! `n w (size(int) + 2 size(double)) = 20 w n` bytes. Binary32 SpMV with `x` fully
//! cached reads `n w (size(int) + size(float)) + n size(float) = (8 w + 4) n` bytes.
//! The ratio `5 w / (2 w + 1)` grows with `w` towards 2.5.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::Serialize;

pub type Rational = Ratio<u128>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpmvModelInput {
    /// Average nonzeros per row, as an exact fraction.
    pub w: Rational,
    /// Rows; only scales the byte counts.
    pub n: Option<u64>,
    pub size_int: u32,
    pub size_float: u32,
    pub size_double: u32,
}

impl SpmvModelInput {
    pub fn new(w: Rational) -> Self {
        Self {
            w,
            n: None,
            size_int: 4,
            size_float: 4,
            size_double: 8,
        }
    }

    /// `w = nnz / n` for a concrete matrix.
    pub fn for_matrix(n: u64, nnz: u64) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::NonPositive);
        }
        let mut input = Self::new(Rational::new(nnz as u128, n as u128));
        input.n = Some(n);
        Ok(input)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    NonPositive,
    Parse(String),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::NonPositive => write!(f, "nonzeros per row must be positive"),
            ModelError::Parse(s) => write!(f, "cannot read `{s}` as a positive number or fraction"),
        }
    }
}

impl std::error::Error for ModelError {}

/// Parse `5`, `2.75` or `7/2` exactly.
pub fn parse_rational(s: &str) -> Result<Rational, ModelError> {
    let bad = || ModelError::Parse(s.to_string());
    let s = s.trim();
    let r = if let Some((num, den)) = s.split_once('/') {
        let num: u128 = num.trim().parse().map_err(|_| bad())?;
        let den: u128 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        Rational::new(num, den)
    } else if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 30 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u128 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let scale = 10u128.pow(frac.len() as u32);
        let frac: u128 = frac.parse().map_err(|_| bad())?;
        Rational::new(int * scale + frac, scale)
    } else {
        Rational::from_integer(s.parse().map_err(|_| bad())?)
    };
    if r == Rational::from_integer(0) {
        return Err(ModelError::NonPositive);
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpmvModel {
    pub w: f64,
    pub w_exact: String,
    pub n: Option<u64>,
    /// Bytes read per row (multiply by `n` for the whole product).
    pub reads_double_per_row: f64,
    pub reads_float_per_row: f64,
    pub reads_double: Option<f64>,
    pub reads_float: Option<f64>,
    pub ratio: f64,
    pub ratio_exact: String,
}

pub fn spmv_speedup_model(input: &SpmvModelInput) -> Result<SpmvModel, ModelError> {
    let w = input.w;
    if *w.numer() == 0 {
        return Err(ModelError::NonPositive);
    }
    let int = Rational::from_integer(input.size_int as u128);
    let float = Rational::from_integer(input.size_float as u128);
    let double = Rational::from_integer(input.size_double as u128);
    let double_row = w * (int + double + double);
    let float_row = w * (int + float) + float;
    let ratio = double_row / float_row;
    let f = |r: Rational| *r.numer() as f64 / *r.denom() as f64;
    let total = |r: Rational| input.n.map(|n| f(r * Rational::from_integer(n as u128)));
    Ok(SpmvModel {
        w: f(w),
        w_exact: w.to_string(),
        n: input.n,
        reads_double_per_row: f(double_row),
        reads_float_per_row: f(float_row),
        reads_double: total(double_row),
        reads_float: total(float_row),
        ratio: f(ratio),
        ratio_exact: ratio.to_string(),
    })
}

impl FromStr for SpmvModelInput {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, ModelError> {
        parse_rational(s).map(Self::new)
    }
}
