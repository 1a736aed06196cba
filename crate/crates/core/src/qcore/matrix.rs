// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex matrices sized for one qubit and its Choi space.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("matrix dimension must be positive"));
        }
        if data.len() != dim * dim {
            return Err(Error::invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Self {
        Self {
            dim: N,
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Outer product |a⟩⟨b|.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        assert_eq!(a.len(), b.len());
        let dim = a.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = a[i] * b[j].conj();
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Tr(A·B) without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        acc
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        let n = a * b;
        let mut out = Self::zeros(n);
        for i in 0..a {
            for j in 0..a {
                let s = self.data[i * a + j];
                if s == ZERO {
                    continue;
                }
                for k in 0..b {
                    for l in 0..b {
                        out.data[(i * b + k) * n + (j * b + l)] = s * other.data[k * b + l];
                    }
                }
            }
        }
        out
    }

    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self - &self.adjoint()).frobenius_norm()
    }

    pub fn unitarity_error(&self) -> f64 {
        (&(&self.adjoint() * self) - &Self::identity(self.dim)).frobenius_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() < tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() < tol
    }

    pub fn det2(&self) -> C64 {
        assert_eq!(self.dim, 2, "det2 needs a 2x2 matrix");
        self.data[0] * self.data[3] - self.data[1] * self.data[2]
    }

    /// min over φ of ‖self − e^{iφ}·other‖_F.
    pub fn phase_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        // optimum phase aligns ⟨other, self⟩
        let overlap = other.trace_product_adjoint(self);
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - phase * b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Tr(self†·other).
    pub fn trace_product_adjoint(&self, other: &Self) -> C64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn eq_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        self.phase_distance(other) < tol
    }

    /// Split a (da·db)-dimensional operator on A⊗B and trace out B.
    pub fn partial_trace_second(&self, db: usize) -> Result<Self> {
        let n = self.dim;
        if db == 0 || !n.is_multiple_of(db) {
            return Err(Error::invalid(format!("cannot trace a {db}-dim factor out of dim {n}")));
        }
        let da = n / db;
        let mut out = Self::zeros(da);
        for i in 0..da {
            for j in 0..da {
                let mut acc = ZERO;
                for k in 0..db {
                    acc += self.data[(i * db + k) * n + (j * db + k)];
                }
                out.data[i * da + j] = acc;
            }
        }
        Ok(out)
    }

    /// Trace out the first factor A of A⊗B, where A has dimension `da`.
    pub fn partial_trace_first(&self, da: usize) -> Result<Self> {
        let n = self.dim;
        if da == 0 || !n.is_multiple_of(da) {
            return Err(Error::invalid(format!("cannot trace a {da}-dim factor out of dim {n}")));
        }
        let db = n / da;
        let mut out = Self::zeros(db);
        for k in 0..db {
            for l in 0..db {
                let mut acc = ZERO;
                for i in 0..da {
                    acc += self.data[(i * db + k) * n + (i * db + l)];
                }
                out.data[k * db + l] = acc;
            }
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Serialize in the line-oriented `re+imj` text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| format_complex(self.data[i * self.dim + j]))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parse the text format. Blank lines and lines starting with `#` are skipped.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<C64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(parse_complex)
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.context(format!("line {}", lineno + 1)))?;
            rows.push(row);
        }
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Parse("matrix text has no rows".into()));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::Parse(format!(
                "row {} has {} entries, expected {dim}",
                bad + 1,
                rows[bad].len()
            )));
        }
        Self::from_vec(dim, rows.into_iter().flatten().collect())
    }
}

fn format_complex(v: C64) -> String {
    let sign = if v.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.17e}{}{:.17e}j", v.re, sign, v.im.abs())
}

/// Parse `a`, `bj`, `a+bj` or `a-bj` (an `i` suffix is accepted too).
pub fn parse_complex(token: &str) -> Result<C64> {
    let bad = || Error::Parse(format!("malformed complex number `{token}`"));
    let t = token.trim();
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('j').or_else(|| t.strip_suffix('i')) else {
        return t.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent and not leading
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            let im_txt = &body[k..];
            let im = match im_txt {
                "+" => 1.0,
                "-" => -1.0,
                s => s.parse::<f64>().map_err(|_| bad())?,
            };
            Ok(C64::new(re, im))
        }
        None => {
            let im = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                s => s.parse::<f64>().map_err(|_| bad())?,
            };
            Ok(C64::new(0.0, im))
        }
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in product");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self * &rhs
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sum");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in difference");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let v = self.data[i * self.dim + j];
                write!(f, "{:>10.6}{:+.6}i  ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_rows([[ZERO, ONE], [ONE, ZERO]])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_rows([[ZERO, -I], [I, ZERO]])
}

/// σ_z = diag(+1, −1) in the (|g⟩, |e⟩) basis, so the ground state has ⟨σ_z⟩ = +1.
pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_rows([[ONE, ZERO], [ZERO, -ONE]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_complex_tokens() {
        assert_eq!(parse_complex("0.5").unwrap(), C64::new(0.5, 0.0));
        assert_eq!(parse_complex("0.138107+0.437984i").unwrap(), C64::new(0.138107, 0.437984));
        assert_eq!(parse_complex("-0.0608019-0.458569i").unwrap(), C64::new(-0.0608019, -0.458569));
        assert_eq!(parse_complex("1e-3-2.5e-2j").unwrap(), C64::new(1e-3, -2.5e-2));
        assert_eq!(parse_complex("-2j").unwrap(), C64::new(0.0, -2.0));
        assert!(parse_complex("1+").is_err());
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn text_round_trip_is_exact() {
        let m = ComplexMatrix::from_rows([
            [C64::new(0.1, -0.2), C64::new(1.0 / 3.0, 1e-17)],
            [C64::new(-5.5e-9, 0.0), C64::new(0.0, -0.0)],
        ]);
        let back = ComplexMatrix::parse_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn ragged_text_is_rejected() {
        assert!(ComplexMatrix::parse_text("1 2\n3\n").is_err());
        assert!(ComplexMatrix::parse_text("# only a comment\n").is_err());
    }

    #[test]
    fn partial_traces_of_product_operator() {
        let a = ComplexMatrix::from_rows([[ONE, I], [-I, C64::new(3.0, 0.0)]]);
        let b = ComplexMatrix::from_rows([[C64::new(2.0, 0.0), ZERO], [ZERO, C64::new(5.0, 0.0)]]);
        let ab = a.kron(&b);
        assert!(ab.partial_trace_second(2).unwrap().max_abs_diff(&a.scale_real(7.0)) < 1e-14);
        assert!(ab.partial_trace_first(2).unwrap().max_abs_diff(&b.scale_real(4.0)) < 1e-14);
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let x = pauli_x();
        let shifted = x.scale(C64::from_polar(1.0, 0.73));
        assert!(x.phase_distance(&shifted) < 1e-12);
        assert!(x.phase_distance(&pauli_z()) > 1.0);
    }
}
