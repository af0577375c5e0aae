//! Exact arithmetic in the Weyl algebra generated by positions `x[i,j]`,
//! momenta `p[i,j]` and a central scalar `h`, subject to `p x = x p + h`
//! for matching variables and commutation otherwise.
//!
//! Products are kept as ordered [`Word`]s inside a [`Polynomial`]; nothing is
//! reordered until [`normal_order`] moves every `x` to the left of every `p`
//! and produces a [`NormalPolynomial`], the form in which algebra elements are
//! compared.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How index pairs name variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryMode {
    /// All `n²` index pairs are distinct variables.
    Generic,
    /// `(i,j)` and `(j,i)` name the same variable.
    Symmetric,
    /// `(j,i)` names the negation of `(i,j)`; the diagonal vanishes.
    Antisymmetric,
}

impl fmt::Display for SymmetryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymmetryMode::Generic => "generic",
            SymmetryMode::Symmetric => "symmetric",
            SymmetryMode::Antisymmetric => "antisymmetric",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommutationSetting {
    /// `[p_v, x_v] = h` for every variable `v`.
    Quantum,
    /// Every generator commutes with every other one.
    Classical,
}

/// The ambient algebra of a polynomial: symmetry mode and matrix dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Space {
    pub mode: SymmetryMode,
    pub n: usize,
}

impl Space {
    pub fn new(mode: SymmetryMode, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        if n > u16::MAX as usize {
            return Err(Error::TooLarge { n, max: u16::MAX as usize });
        }
        Ok(Space { mode, n })
    }

    pub fn var(&self, kind: Kind, i: usize, j: usize) -> Result<SignedVariable> {
        canonical_variable(kind, i, j, self.mode, self.n)
    }

    fn check(&self, other: &Space) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch { left: *self, right: *other })
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(n={})", self.mode, self.n)
    }
}

/// Canonical index pair of a variable, 1-based. Ordered by (row, column).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId {
    pub row: u16,
    pub col: u16,
}

impl VarId {
    pub fn new(row: usize, col: usize) -> Self {
        VarId { row: row as u16, col: col as u16 }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.row, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    X,
    P,
}

/// A nonzero generator `x_v` or `p_v` with its sign already absorbed elsewhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator {
    pub kind: Kind,
    pub id: VarId,
}

impl Generator {
    pub fn x(row: usize, col: usize) -> Self {
        Generator { kind: Kind::X, id: VarId::new(row, col) }
    }

    pub fn p(row: usize, col: usize) -> Self {
        Generator { kind: Kind::P, id: VarId::new(row, col) }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = match self.kind {
            Kind::X => 'x',
            Kind::P => 'p',
        };
        write!(f, "{letter}{}", self.id)
    }
}

/// Result of canonicalizing an index pair under a symmetry mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignedVariable {
    /// Antisymmetric diagonal entry.
    Zero,
    Plus(Generator),
    Minus(Generator),
}

impl SignedVariable {
    pub fn generator(&self) -> Option<Generator> {
        match *self {
            SignedVariable::Zero => None,
            SignedVariable::Plus(g) | SignedVariable::Minus(g) => Some(g),
        }
    }

    pub fn sign(&self) -> i8 {
        match self {
            SignedVariable::Zero => 0,
            SignedVariable::Plus(_) => 1,
            SignedVariable::Minus(_) => -1,
        }
    }
}

pub fn canonical_variable(kind: Kind, i: usize, j: usize, mode: SymmetryMode, n: usize) -> Result<SignedVariable> {
    if i == 0 || j == 0 || i > n || j > n {
        return Err(Error::IndexOutOfRange { i, j, n });
    }
    let make = |r: usize, c: usize| Generator { kind, id: VarId::new(r, c) };
    Ok(match mode {
        SymmetryMode::Generic => SignedVariable::Plus(make(i, j)),
        SymmetryMode::Symmetric => SignedVariable::Plus(make(i.min(j), i.max(j))),
        SymmetryMode::Antisymmetric => match i.cmp(&j) {
            Ordering::Equal => SignedVariable::Zero,
            Ordering::Less => SignedVariable::Plus(make(i, j)),
            Ordering::Greater => SignedVariable::Minus(make(j, i)),
        },
    })
}

/// An ordered product `coefficient · h^h_power · f_1 f_2 … f_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    pub coefficient: BigInt,
    pub h_power: u32,
    pub factors: Vec<Generator>,
}

impl Word {
    pub fn scalar(coefficient: impl Into<BigInt>, h_power: u32) -> Self {
        Word { coefficient: coefficient.into(), h_power, factors: Vec::new() }
    }

    /// `None` for the zero marker.
    pub fn from_variable(var: SignedVariable) -> Option<Self> {
        let g = var.generator()?;
        Some(Word { coefficient: BigInt::from(var.sign()), h_power: 0, factors: vec![g] })
    }

    pub fn mul(&self, rhs: &Word) -> Word {
        let mut factors = Vec::with_capacity(self.factors.len() + rhs.factors.len());
        factors.extend_from_slice(&self.factors);
        factors.extend_from_slice(&rhs.factors);
        Word { coefficient: &self.coefficient * &rhs.coefficient, h_power: self.h_power + rhs.h_power, factors }
    }

    pub fn reversed(&self) -> Word {
        let mut w = self.clone();
        w.factors.reverse();
        w
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if !self.coefficient.is_one() || (self.h_power == 0 && self.factors.is_empty()) {
            parts.push(self.coefficient.to_string());
        }
        match self.h_power {
            0 => {}
            1 => parts.push("h".into()),
            k => parts.push(format!("h^{k}")),
        }
        parts.extend(self.factors.iter().map(|g| g.to_string()));
        f.write_str(&parts.join(" "))
    }
}

/// A formal sum of ordered words. Addition concatenates; nothing is reordered.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    space: Space,
    terms: Vec<Word>,
}

impl Polynomial {
    pub fn zero(space: Space) -> Self {
        Polynomial { space, terms: Vec::new() }
    }

    pub fn one(space: Space) -> Self {
        Self::scalar(space, 1, 0)
    }

    /// `coefficient · h^h_power`.
    pub fn scalar(space: Space, coefficient: impl Into<BigInt>, h_power: u32) -> Self {
        let coefficient = coefficient.into();
        if coefficient.is_zero() {
            return Self::zero(space);
        }
        Polynomial { space, terms: vec![Word::scalar(coefficient, h_power)] }
    }

    pub fn from_words(space: Space, words: impl IntoIterator<Item = Word>) -> Self {
        Polynomial { space, terms: words.into_iter().filter(|w| !w.coefficient.is_zero()).collect() }
    }

    /// The canonicalized generator named by `(i, j)`; zero on the antisymmetric diagonal.
    pub fn generator(space: Space, kind: Kind, i: usize, j: usize) -> Result<Self> {
        let var = space.var(kind, i, j)?;
        Ok(Self::from_words(space, Word::from_variable(var)))
    }

    pub fn x(space: Space, i: usize, j: usize) -> Result<Self> {
        Self::generator(space, Kind::X, i, j)
    }

    pub fn p(space: Space, i: usize, j: usize) -> Result<Self> {
        Self::generator(space, Kind::P, i, j)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn terms(&self) -> &[Word] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, rhs: &Polynomial) -> Result<Polynomial> {
        self.space.check(&rhs.space)?;
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&rhs.terms);
        Ok(Polynomial { space: self.space, terms })
    }

    /// In-place `self += rhs`.
    pub fn append(&mut self, rhs: Polynomial) -> Result<()> {
        self.space.check(&rhs.space)?;
        self.terms.extend(rhs.terms);
        Ok(())
    }

    pub fn sub(&self, rhs: &Polynomial) -> Result<Polynomial> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(&BigInt::from(-1))
    }

    pub fn scale(&self, c: &BigInt) -> Polynomial {
        Polynomial::from_words(
            self.space,
            self.terms.iter().map(|w| Word { coefficient: &w.coefficient * c, ..w.clone() }),
        )
    }

    /// Distributive concatenation product, left operand first.
    pub fn mul(&self, rhs: &Polynomial) -> Result<Polynomial> {
        self.space.check(&rhs.space)?;
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                terms.push(a.mul(b));
            }
        }
        Ok(Polynomial { space: self.space, terms })
    }

    /// Reverses the factor order of every word.
    pub fn reversed(&self) -> Polynomial {
        Polynomial { space: self.space, terms: self.terms.iter().map(Word::reversed).collect() }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|w| w.to_string()).collect();
        f.write_str(&parts.join(" + "))
    }
}

pub fn poly_mul(p: &Polynomial, q: &Polynomial) -> Result<Polynomial> {
    p.mul(q)
}

/// Key of a normal-ordered monomial `h^k · x_part · p_part`.
///
/// Ordered by descending `h_power`, then `x_part`, then `p_part`; this is the
/// order in which canonical text lists terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct MonomialKey {
    pub h_power: u32,
    pub x_part: Vec<VarId>,
    pub p_part: Vec<VarId>,
}

impl MonomialKey {
    /// Sorts both parts.
    pub fn new(h_power: u32, mut x_part: Vec<VarId>, mut p_part: Vec<VarId>) -> Self {
        x_part.sort_unstable();
        p_part.sort_unstable();
        MonomialKey { h_power, x_part, p_part }
    }

    /// The monomial as an ordered word with all x's first.
    pub fn to_word(&self, coefficient: BigInt) -> Word {
        let factors = self
            .x_part
            .iter()
            .map(|&id| Generator { kind: Kind::X, id })
            .chain(self.p_part.iter().map(|&id| Generator { kind: Kind::P, id }))
            .collect();
        Word { coefficient, h_power: self.h_power, factors }
    }
}

impl Ord for MonomialKey {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .h_power
            .cmp(&self.h_power)
            .then_with(|| self.x_part.cmp(&other.x_part))
            .then_with(|| self.p_part.cmp(&other.p_part))
    }
}

impl PartialOrd for MonomialKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A single normal-ordered monomial with its coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalMonomial {
    pub coefficient: BigInt,
    pub key: MonomialKey,
}

impl NormalMonomial {
    pub fn new(coefficient: impl Into<BigInt>, key: MonomialKey) -> Self {
        NormalMonomial { coefficient: coefficient.into(), key }
    }

    pub fn h_power(&self) -> u32 {
        self.key.h_power
    }

    pub fn x_part(&self) -> &[VarId] {
        &self.key.x_part
    }

    pub fn p_part(&self) -> &[VarId] {
        &self.key.p_part
    }

    pub fn neg(&self) -> NormalMonomial {
        NormalMonomial { coefficient: -&self.coefficient, key: self.key.clone() }
    }
}

impl fmt::Display for NormalMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_term(f, &self.key, &self.coefficient)
    }
}

/// Canonical normal form: a map from monomial keys to nonzero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct NormalPolynomial {
    terms: BTreeMap<MonomialKey, BigInt>,
}

impl NormalPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of distinct monomials.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MonomialKey, &BigInt)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = NormalMonomial> + '_ {
        self.terms.iter().map(|(k, c)| NormalMonomial { coefficient: c.clone(), key: k.clone() })
    }

    pub fn coefficient(&self, key: &MonomialKey) -> BigInt {
        self.terms.get(key).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, key: MonomialKey, coefficient: BigInt) {
        if coefficient.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coefficient);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coefficient;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_monomial(&mut self, m: NormalMonomial) {
        self.add_term(m.key, m.coefficient);
    }

    pub fn add_assign(&mut self, rhs: &NormalPolynomial) {
        for (k, c) in &rhs.terms {
            self.add_term(k.clone(), c.clone());
        }
    }

    /// Sum of two normal forms, reusing the larger map.
    pub fn merge(mut self, rhs: NormalPolynomial) -> NormalPolynomial {
        let (mut big, small) =
            if self.terms.len() >= rhs.terms.len() { (std::mem::take(&mut self), rhs) } else { (rhs, self) };
        for (k, c) in small.terms {
            big.add_term(k, c);
        }
        big
    }

    pub fn neg(&self) -> NormalPolynomial {
        NormalPolynomial { terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect() }
    }

    pub fn sub(&self, rhs: &NormalPolynomial) -> NormalPolynomial {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), -c);
        }
        out
    }

    /// Substitutes `h = 0`.
    pub fn at_h_zero(&self) -> NormalPolynomial {
        NormalPolynomial {
            terms: self.terms.iter().filter(|(k, _)| k.h_power == 0).map(|(k, c)| (k.clone(), c.clone())).collect(),
        }
    }

    /// Multiplies every monomial by `h^k`.
    pub fn shift_h(&self, k: u32) -> NormalPolynomial {
        NormalPolynomial {
            terms: self
                .terms
                .iter()
                .map(|(key, c)| (MonomialKey { h_power: key.h_power + k, ..key.clone() }, c.clone()))
                .collect(),
        }
    }

    /// Reinterprets the normal form as ordered words (x's before p's).
    pub fn to_polynomial(&self, space: Space) -> Polynomial {
        Polynomial::from_words(space, self.terms.iter().map(|(k, c)| k.to_word(c.clone())))
    }

    /// Canonical text of the first `limit` terms.
    pub fn head(&self, limit: usize) -> Vec<String> {
        self.monomials().take(limit).map(|m| m.to_string()).collect()
    }

    pub fn format_canonical(&self) -> String {
        self.to_string()
    }
}

impl FromIterator<NormalMonomial> for NormalPolynomial {
    fn from_iter<I: IntoIterator<Item = NormalMonomial>>(iter: I) -> Self {
        let mut out = NormalPolynomial::zero();
        for m in iter {
            out.add_monomial(m);
        }
        out
    }
}

fn fmt_power(parts: &mut Vec<String>, base: &str, count: usize) {
    match count {
        0 => {}
        1 => parts.push(base.to_string()),
        k => parts.push(format!("{base}^{k}")),
    }
}

fn fmt_block(parts: &mut Vec<String>, letter: char, ids: &[VarId]) {
    let mut i = 0;
    while i < ids.len() {
        let run = ids[i..].iter().take_while(|&&v| v == ids[i]).count();
        fmt_power(parts, &format!("{letter}{}", ids[i]), run);
        i += run;
    }
}

fn fmt_term(f: &mut fmt::Formatter<'_>, key: &MonomialKey, c: &BigInt) -> fmt::Result {
    let mut parts = Vec::new();
    let bare = key.h_power == 0 && key.x_part.is_empty() && key.p_part.is_empty();
    if !c.is_one() || bare {
        parts.push(c.to_string());
    }
    fmt_power(&mut parts, "h", key.h_power as usize);
    fmt_block(&mut parts, 'x', &key.x_part);
    fmt_block(&mut parts, 'p', &key.p_part);
    f.write_str(&parts.join(" "))
}

/// `<coeff> h^<k> x[i,j]… p[i,j]…` per term in key order, joined by ` + `.
/// A unit coefficient and unit exponents are elided; zero renders as `0`.
impl fmt::Display for NormalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (k, c)) in self.terms.iter().enumerate() {
            if idx > 0 {
                f.write_str(" + ")?;
            }
            fmt_term(f, k, c)?;
        }
        Ok(())
    }
}

pub fn format_canonical(p: &NormalPolynomial) -> String {
    p.to_string()
}

/// How [`normal_order_with`] reduces a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Per-variable closed form: words factor over variables, and each
    /// single-variable word is pushed through `p^m x = x p^m + m h p^(m-1)`.
    Factorized,
    /// Adjacent-pair rewriting, always reducing the leftmost `p x` pair.
    LeftmostRewrite,
    /// Adjacent-pair rewriting, always reducing the rightmost `p x` pair.
    RightmostRewrite,
}

const PARALLEL_THRESHOLD: usize = 2048;

pub fn normal_order(p: &Polynomial, setting: CommutationSetting) -> NormalPolynomial {
    normal_order_with(p, setting, Strategy::Factorized)
}

pub fn normal_order_with(p: &Polynomial, setting: CommutationSetting, strategy: Strategy) -> NormalPolynomial {
    if p.terms.len() < PARALLEL_THRESHOLD {
        let mut acc = NormalPolynomial::zero();
        for w in &p.terms {
            order_word_into(w, setting, strategy, &mut acc);
        }
        return acc;
    }
    p.terms
        .par_iter()
        .fold(NormalPolynomial::zero, |mut acc, w| {
            order_word_into(w, setting, strategy, &mut acc);
            acc
        })
        .reduce(NormalPolynomial::zero, NormalPolynomial::merge)
}

/// Normal-orders a single word and adds the result to `acc`.
pub fn order_word_into(w: &Word, setting: CommutationSetting, strategy: Strategy, acc: &mut NormalPolynomial) {
    if w.coefficient.is_zero() {
        return;
    }
    match strategy {
        Strategy::Factorized => factorized_into(w, setting, acc),
        Strategy::LeftmostRewrite => rewrite_into(w, setting, true, acc),
        Strategy::RightmostRewrite => rewrite_into(w, setting, false, acc),
    }
}

pub fn poly_equal(p: &Polynomial, q: &Polynomial, setting: CommutationSetting) -> Result<bool> {
    p.space.check(&q.space)?;
    Ok(normal_order(p, setting) == normal_order(q, setting))
}

/// Normal form of a single-variable subword: `coeffs[k]` multiplies
/// `h^k x^(xs-k) p^(ps-k)`.
struct VarChain {
    xs: u32,
    ps: u32,
    coeffs: Vec<BigInt>,
}

impl VarChain {
    fn new() -> Self {
        VarChain { xs: 0, ps: 0, coeffs: vec![BigInt::one()] }
    }

    fn push(&mut self, kind: Kind, setting: CommutationSetting) {
        match kind {
            Kind::P => self.ps += 1,
            Kind::X => {
                if setting == CommutationSetting::Quantum && self.ps > 0 {
                    // p^m x = x p^m + m h p^(m-1), applied to each h^k x^a p^(ps-k)
                    let mut next = self.coeffs.clone();
                    next.push(BigInt::zero());
                    for (k, c) in self.coeffs.iter().enumerate() {
                        let m = self.ps - k as u32;
                        if m > 0 && !c.is_zero() {
                            next[k + 1] += c * m;
                        }
                    }
                    while next.last().is_some_and(|c| c.is_zero()) {
                        next.pop();
                    }
                    self.coeffs = next;
                }
                self.xs += 1;
            }
        }
    }
}

fn factorized_into(w: &Word, setting: CommutationSetting, acc: &mut NormalPolynomial) {
    let mut chains: BTreeMap<VarId, VarChain> = BTreeMap::new();
    for g in &w.factors {
        chains.entry(g.id).or_insert_with(VarChain::new).push(g.kind, setting);
    }
    let chains: Vec<(VarId, VarChain)> = chains.into_iter().collect();
    let mut choice = vec![0usize; chains.len()];
    loop {
        let mut coefficient = w.coefficient.clone();
        let mut h_power = w.h_power;
        let mut x_part = Vec::new();
        let mut p_part = Vec::new();
        for ((id, chain), &k) in chains.iter().zip(&choice) {
            coefficient *= &chain.coeffs[k];
            h_power += k as u32;
            x_part.extend(std::iter::repeat_n(*id, (chain.xs - k as u32) as usize));
            p_part.extend(std::iter::repeat_n(*id, (chain.ps - k as u32) as usize));
        }
        // ids are visited in sorted order, so both parts are already sorted
        acc.add_term(MonomialKey { h_power, x_part, p_part }, coefficient);

        let mut pos = 0;
        loop {
            if pos == chains.len() {
                return;
            }
            choice[pos] += 1;
            if choice[pos] < chains[pos].1.coeffs.len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

fn rewrite_into(w: &Word, setting: CommutationSetting, leftmost: bool, acc: &mut NormalPolynomial) {
    let mut stack: Vec<Word> = vec![w.clone()];
    while let Some(mut word) = stack.pop() {
        let is_px = |k: &usize| word.factors[*k].kind == Kind::P && word.factors[*k + 1].kind == Kind::X;
        let len = word.factors.len();
        let site = if leftmost {
            (0..len.saturating_sub(1)).find(is_px)
        } else {
            (0..len.saturating_sub(1)).rev().find(is_px)
        };
        let Some(k) = site else {
            let split = word.factors.iter().take_while(|g| g.kind == Kind::X).count();
            let x_part = word.factors[..split].iter().map(|g| g.id).collect();
            let p_part = word.factors[split..].iter().map(|g| g.id).collect();
            acc.add_term(MonomialKey::new(word.h_power, x_part, p_part), word.coefficient);
            continue;
        };
        let contracts = setting == CommutationSetting::Quantum && word.factors[k].id == word.factors[k + 1].id;
        if contracts {
            let mut contracted = word.clone();
            contracted.factors.drain(k..k + 2);
            contracted.h_power += 1;
            stack.push(contracted);
        }
        word.factors.swap(k, k + 1);
        stack.push(word);
    }
}

impl NormalPolynomial {
    /// Largest absolute coefficient, for reporting growth.
    pub fn max_abs_coefficient(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_default()
    }
}
