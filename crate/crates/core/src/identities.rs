//! Polarization matrices, noncommutative determinants and the four
//! Capelli-type identities.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{permutations, sign};
use crate::weyl::{normal_order, CommutationSetting, NormalPolynomial, Polynomial, Space, SymmetryMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdentityKind {
    /// Capelli: generic matrices, correction `h(n-i)`.
    #[serde(rename = "cap")]
    Cap,
    /// Turnbull: symmetric matrices, doubled diagonal momenta, correction `h(n-i)`.
    #[serde(rename = "tur")]
    Tur,
    /// Turnbull's antisymmetric analog: correction `-h(n-i)`, permanent on the right.
    #[serde(rename = "tur-anti")]
    TurAnti,
    /// Howe-Umeda-Kostant-Sahi: antisymmetric, correction `h(n-i-1)`, even `n` only.
    #[serde(rename = "hu-ks")]
    Huks,
}

impl IdentityKind {
    pub const ALL: [IdentityKind; 4] =
        [IdentityKind::Cap, IdentityKind::Tur, IdentityKind::TurAnti, IdentityKind::Huks];

    pub fn mode(self) -> SymmetryMode {
        match self {
            IdentityKind::Cap => SymmetryMode::Generic,
            IdentityKind::Tur => SymmetryMode::Symmetric,
            IdentityKind::TurAnti | IdentityKind::Huks => SymmetryMode::Antisymmetric,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            IdentityKind::Cap => "cap",
            IdentityKind::Tur => "tur",
            IdentityKind::TurAnti => "tur-anti",
            IdentityKind::Huks => "hu-ks",
        }
    }

    /// Whether the identity is asserted to hold at this dimension.
    pub fn holds_at(self, n: usize) -> bool {
        match self {
            IdentityKind::Huks => n.is_multiple_of(2),
            _ => true,
        }
    }

    /// Coefficient of `h` on the diagonal entry `(i,i)`.
    fn diagonal_correction(self, n: usize, i: usize) -> i64 {
        let (n, i) = (n as i64, i as i64);
        match self {
            IdentityKind::Cap | IdentityKind::Tur => n - i,
            IdentityKind::TurAnti => -(n - i),
            IdentityKind::Huks => n - i - 1,
        }
    }
}

impl fmt::Display for IdentityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cap" | "capelli" => Ok(IdentityKind::Cap),
            "tur" | "turnbull" => Ok(IdentityKind::Tur),
            "tur-anti" | "tur_anti" | "turanti" => Ok(IdentityKind::TurAnti),
            "hu-ks" | "huks" | "hu_ks" => Ok(IdentityKind::Huks),
            other => Err(format!("unknown identity `{other}` (expected cap, tur, tur-anti, hu-ks)")),
        }
    }
}

/// Resource cap on the dimension of factorial-cost computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_n: usize,
}

impl Limits {
    /// Default for full identity verification and object enumeration.
    pub const VERIFY: Limits = Limits { max_n: 4 };
    /// Default for bare determinant and permanent expansion.
    pub const DETERMINANT: Limits = Limits { max_n: 6 };

    pub const fn new(max_n: usize) -> Self {
        Limits { max_n }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if n > self.max_n {
            Err(Error::TooLarge { n, max: self.max_n })
        } else {
            Ok(())
        }
    }
}

impl Default for Limits {
    fn default() -> Self {
        Limits::VERIFY
    }
}

/// Square matrix of polynomials over one space, stored row-major, 1-based access.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    space: Space,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn from_fn(space: Space, mut f: impl FnMut(usize, usize) -> Result<Polynomial>) -> Result<Self> {
        let n = space.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 1..=n {
            for j in 1..=n {
                let e = f(i, j)?;
                if e.space() != space {
                    return Err(Error::SpaceMismatch { left: space, right: e.space() });
                }
                entries.push(e);
            }
        }
        Ok(PolyMatrix { space, entries })
    }

    pub fn n(&self) -> usize {
        self.space.n
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn get(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[(i - 1) * self.space.n + (j - 1)]
    }

    pub fn swap_columns(&mut self, a: usize, b: usize) {
        let n = self.space.n;
        for i in 0..n {
            self.entries.swap(i * n + a - 1, i * n + b - 1);
        }
    }
}

/// `X = (x_ij)`.
pub fn position_matrix(space: Space) -> Result<PolyMatrix> {
    PolyMatrix::from_fn(space, |i, j| Polynomial::x(space, i, j))
}

/// `P = (p_ij)`, or `P̃ = (p_ij (1 + δ_ij))` when `double_diagonal`.
pub fn momentum_matrix(space: Space, double_diagonal: bool) -> Result<PolyMatrix> {
    PolyMatrix::from_fn(space, |i, j| {
        let p = Polynomial::p(space, i, j)?;
        Ok(if double_diagonal && i == j { p.scale(&BigInt::from(2)) } else { p })
    })
}

/// `(XᵗP)_ij = Σ_k x_ki p_kj` with `P̃` in place of `P` when `double_diagonal`.
pub fn polarization_matrix(space: Space, double_diagonal: bool) -> Result<PolyMatrix> {
    PolyMatrix::from_fn(space, |i, j| {
        let mut entry = Polynomial::zero(space);
        for k in 1..=space.n {
            let mut p = Polynomial::p(space, k, j)?;
            if double_diagonal && k == j {
                p = p.scale(&BigInt::from(2));
            }
            entry.append(Polynomial::x(space, k, i)?.mul(&p)?)?;
        }
        Ok(entry)
    })
}

/// The matrix `A` whose column determinant is the left side of `kind`.
pub fn build_a(kind: IdentityKind, n: usize) -> Result<PolyMatrix> {
    let space = Space::new(kind.mode(), n)?;
    let base = polarization_matrix(space, kind == IdentityKind::Tur)?;
    PolyMatrix::from_fn(space, |i, j| {
        let entry = base.get(i, j).clone();
        if i == j {
            entry.add(&Polynomial::scalar(space, kind.diagonal_correction(n, i), 1))
        } else {
            Ok(entry)
        }
    })
}

fn column_product(m: &PolyMatrix, sigma: &[usize]) -> Result<Polynomial> {
    let mut acc = Polynomial::one(m.space);
    for (col, &row) in sigma.iter().enumerate() {
        acc = acc.mul(m.get(row + 1, col + 1))?;
    }
    Ok(acc)
}

fn row_product(m: &PolyMatrix, sigma: &[usize]) -> Result<Polynomial> {
    let mut acc = Polynomial::one(m.space);
    for (row, &col) in sigma.iter().enumerate() {
        acc = acc.mul(m.get(row + 1, col + 1))?;
    }
    Ok(acc)
}

fn signed_expansion(
    m: &PolyMatrix,
    limits: &Limits,
    product: fn(&PolyMatrix, &[usize]) -> Result<Polynomial>,
) -> Result<Polynomial> {
    limits.check(m.n())?;
    let mut out = Polynomial::zero(m.space);
    for sigma in permutations(m.n()) {
        let mut term = product(m, &sigma)?;
        if sign(&sigma) < 0 {
            term = term.neg();
        }
        out.append(term)?;
    }
    Ok(out)
}

/// `Σ_σ sgn(σ) A_{σ1,1} A_{σ2,2} … A_{σn,n}`, factors taken column by column.
pub fn column_determinant(m: &PolyMatrix, limits: &Limits) -> Result<Polynomial> {
    signed_expansion(m, limits, column_product)
}

/// `Σ_σ sgn(σ) A_{1,σ1} … A_{n,σn}`, factors taken row by row.
pub fn row_determinant(m: &PolyMatrix, limits: &Limits) -> Result<Polynomial> {
    signed_expansion(m, limits, row_product)
}

/// Normal form of the column determinant, computed one permutation at a time
/// in parallel without materializing the full expansion.
pub fn column_determinant_normal(
    m: &PolyMatrix,
    setting: CommutationSetting,
    limits: &Limits,
) -> Result<NormalPolynomial> {
    column_expansion_normal(m, setting, limits, true)
}

/// Normal form of the column permanent `Σ_σ A_{σ1,1} … A_{σn,n}`.
pub fn column_permanent_normal(
    m: &PolyMatrix,
    setting: CommutationSetting,
    limits: &Limits,
) -> Result<NormalPolynomial> {
    column_expansion_normal(m, setting, limits, false)
}

fn column_expansion_normal(
    m: &PolyMatrix,
    setting: CommutationSetting,
    limits: &Limits,
    signed: bool,
) -> Result<NormalPolynomial> {
    limits.check(m.n())?;
    permutations(m.n())
        .par_iter()
        .map(|sigma| {
            let mut term = column_product(m, sigma)?;
            if signed && sign(sigma) < 0 {
                term = term.neg();
            }
            Ok(normal_order(&term, setting))
        })
        .try_reduce(NormalPolynomial::zero, |a, b| Ok(a.merge(b)))
}

/// `Σ_σ Π_c M_{σc,c}` with every generator commuting.
pub fn permanent_classical(m: &PolyMatrix, limits: &Limits) -> Result<NormalPolynomial> {
    column_expansion_normal(m, CommutationSetting::Classical, limits, false)
}

/// Right side of `kind`: `det X · det P` (`det P̃` for Turnbull), or `Per(XᵗP)`.
pub fn rhs_polynomial(kind: IdentityKind, n: usize) -> Result<NormalPolynomial> {
    rhs_polynomial_with(kind, n, &Limits::DETERMINANT)
}

pub fn rhs_polynomial_with(kind: IdentityKind, n: usize, limits: &Limits) -> Result<NormalPolynomial> {
    let space = Space::new(kind.mode(), n)?;
    limits.check(n)?;
    if kind == IdentityKind::TurAnti {
        return permanent_classical(&polarization_matrix(space, false)?, limits);
    }
    // entries within each block commute, and the x-block precedes the p-block
    let det_x = column_determinant(&position_matrix(space)?, limits)?;
    let det_p = column_determinant(&momentum_matrix(space, kind == IdentityKind::Tur)?, limits)?;
    let dx = normal_order(&det_x, CommutationSetting::Classical).to_polynomial(space);
    let dp = normal_order(&det_p, CommutationSetting::Classical).to_polynomial(space);
    Ok(normal_order(&dx.mul(&dp)?, CommutationSetting::Quantum))
}

/// Normal form of the column determinant of `build_a(kind, n)`.
pub fn lhs_polynomial(kind: IdentityKind, n: usize, limits: &Limits) -> Result<NormalPolynomial> {
    limits.check(n)?;
    column_determinant_normal(&build_a(kind, n)?, CommutationSetting::Quantum, limits)
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub kind: IdentityKind,
    pub n: usize,
    pub lhs_term_count: usize,
    pub rhs_term_count: usize,
    pub equal: bool,
    /// `lhs - rhs`; zero exactly when `equal`.
    pub residual: NormalPolynomial,
    pub elapsed: Duration,
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} n={}: {} (lhs {} terms, rhs {} terms, residual {} terms, {:.3}s)",
            self.kind,
            self.n,
            if self.equal { "equal" } else { "NOT equal" },
            self.lhs_term_count,
            self.rhs_term_count,
            self.residual.len(),
            self.elapsed.as_secs_f64()
        )
    }
}

pub fn verify_identity(kind: IdentityKind, n: usize) -> Result<VerificationReport> {
    verify_identity_with(kind, n, &Limits::VERIFY)
}

pub fn verify_identity_with(kind: IdentityKind, n: usize, limits: &Limits) -> Result<VerificationReport> {
    let start = Instant::now();
    let lhs = lhs_polynomial(kind, n, limits)?;
    let rhs = rhs_polynomial_with(kind, n, limits)?;
    let residual = lhs.sub(&rhs);
    Ok(VerificationReport {
        kind,
        n,
        lhs_term_count: lhs.len(),
        rhs_term_count: rhs.len(),
        equal: residual.is_zero(),
        residual,
        elapsed: start.elapsed(),
    })
}
