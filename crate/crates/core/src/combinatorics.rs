//! The 4×n objects enumerated by the expanded column determinant, their
//! weights, links and contraction sets, and the sign-reversing involutions
//! that cancel every bad pair.
//!
//! A [`GMatrix`] stores the rows `a`, `b`, `d`; the row `c` is always
//! `1..=n` and is implied. Column `i` carries the factor
//! `x[b_i,a_i] p[b_i,i]` when `d_i` is even and `h` when `d_i = 1`.
//!
//! A link `(i,j)` pairs the momentum of column `i` with the position of a
//! later column `j` naming the same variable. Choosing a set `K` of links
//! with distinct sources and distinct ends selects one monomial of the
//! normal-ordered weight: each chosen link contributes `h` and consumes its
//! `p` and `x`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identities::{IdentityKind, Limits};
use crate::perm::{permutations, sign};
use crate::weyl::{
    canonical_variable, Kind, MonomialKey, NormalMonomial, NormalPolynomial, Polynomial, Space, SymmetryMode, VarId,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectFamily {
    /// Generic matrices, `d ∈ {0,1}`.
    Capelli,
    /// Symmetric matrices, `d ∈ {0,1,2}`; `d = 2` encodes the doubled diagonal momentum.
    Turnbull,
}

impl ObjectFamily {
    pub fn mode(self) -> SymmetryMode {
        match self {
            ObjectFamily::Capelli => SymmetryMode::Generic,
            ObjectFamily::Turnbull => SymmetryMode::Symmetric,
        }
    }

    pub fn identity(self) -> IdentityKind {
        match self {
            ObjectFamily::Capelli => IdentityKind::Cap,
            ObjectFamily::Turnbull => IdentityKind::Tur,
        }
    }

    /// The family whose weights sum to the left side of `kind`, if any.
    pub fn for_identity(kind: IdentityKind) -> Option<Self> {
        match kind {
            IdentityKind::Cap => Some(ObjectFamily::Capelli),
            IdentityKind::Tur => Some(ObjectFamily::Turnbull),
            IdentityKind::TurAnti | IdentityKind::Huks => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ObjectFamily::Capelli => "capelli",
            ObjectFamily::Turnbull => "turnbull",
        }
    }

    fn max_d(self) -> u8 {
        match self {
            ObjectFamily::Capelli => 1,
            ObjectFamily::Turnbull => 2,
        }
    }
}

impl fmt::Display for ObjectFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "capelli" | "cap" | "a" => Ok(ObjectFamily::Capelli),
            "turnbull" | "tur" | "t" => Ok(ObjectFamily::Turnbull),
            other => Err(format!("unknown family `{other}` (expected capelli or turnbull)")),
        }
    }
}

/// One object of a family. Indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GMatrix {
    pub n: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub d: Vec<u8>,
}

impl GMatrix {
    pub fn new(a: Vec<usize>, b: Vec<usize>, d: Vec<u8>) -> Self {
        GMatrix { n: a.len(), a, b, d }
    }

    pub fn a(&self, i: usize) -> usize {
        self.a[i - 1]
    }

    pub fn b(&self, i: usize) -> usize {
        self.b[i - 1]
    }

    pub fn d(&self, i: usize) -> u8 {
        self.d[i - 1]
    }

    fn set_column(&mut self, i: usize, a: usize, b: usize, d: u8) {
        self.a[i - 1] = a;
        self.b[i - 1] = b;
        self.d[i - 1] = d;
    }

    /// Sign of the permutation `a`.
    pub fn sign(&self) -> i8 {
        sign(&self.a)
    }

    /// Human-readable list of every violated family property; empty when valid.
    pub fn violations(&self, family: ObjectFamily) -> Vec<String> {
        let n = self.n;
        let mut out = Vec::new();
        if n == 0 {
            out.push("n must be at least 1".to_string());
            return out;
        }
        if self.a.len() != n || self.b.len() != n || self.d.len() != n {
            out.push(format!(
                "rows must have length n={n} (a: {}, b: {}, d: {})",
                self.a.len(),
                self.b.len(),
                self.d.len()
            ));
            return out;
        }
        let mut seen = vec![false; n + 1];
        let is_perm = self.a.iter().all(|&v| {
            let ok = (1..=n).contains(&v) && !seen[v];
            if ok {
                seen[v] = true;
            }
            ok
        });
        if !is_perm {
            out.push(format!("property 1: a={:?} is not a permutation of 1..{n}", self.a));
        }
        for i in 1..=n {
            let (a, b, d) = (self.a(i), self.b(i), self.d(i));
            if d > family.max_d() {
                out.push(format!("property 3: d_{i}={d} is not allowed in the {family} family"));
                continue;
            }
            if !(1..=n).contains(&b) {
                out.push(format!("property 4: b_{i}={b} is outside 1..{n}"));
                continue;
            }
            match d {
                1 => {
                    if a != i {
                        out.push(format!("property 4: d_{i}=1 requires a_{i}={i}, found {a}"));
                    }
                    if b <= i {
                        out.push(format!("property 4: d_{i}=1 requires {}<=b_{i}<={n}, found {b}", i + 1));
                    }
                }
                2 if b != i => out.push(format!("property 4: d_{i}=2 requires b_{i}={i}, found {b}")),
                _ => {}
            }
        }
        out
    }

    pub fn validate(&self, family: ObjectFamily) -> Result<()> {
        let v = self.violations(family);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidObject(v))
        }
    }

    fn is_even(&self, i: usize) -> bool {
        self.d(i).is_multiple_of(2)
    }

    /// Which link condition, if any, joins the momentum of column `i` to the
    /// position of column `j`. Direct wins when both hold.
    pub fn link_variant(&self, family: ObjectFamily, i: usize, j: usize) -> Option<LinkVariant> {
        if !(i < j && j <= self.n && self.is_even(i) && self.is_even(j)) {
            return None;
        }
        let src = (self.b(i), i);
        if src == (self.b(j), self.a(j)) {
            Some(LinkVariant::Direct)
        } else if family == ObjectFamily::Turnbull && src == (self.a(j), self.b(j)) {
            Some(LinkVariant::Flipped)
        } else {
            None
        }
    }

    fn direct_holds(&self, i: usize, j: usize) -> bool {
        (self.b(i), i) == (self.b(j), self.a(j))
    }

    fn flipped_holds(&self, i: usize, j: usize) -> bool {
        (self.b(i), i) == (self.a(j), self.b(j))
    }
}

impl fmt::Display for GMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(",");
        write!(
            f,
            "a=({}) b=({}) d=({})",
            join(&mut self.a.iter().map(|v| v.to_string())),
            join(&mut self.b.iter().map(|v| v.to_string())),
            join(&mut self.d.iter().map(|v| v.to_string()))
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkVariant {
    /// `(b_i, i) = (b_j, a_j)`
    Direct,
    /// `(b_i, i) = (a_j, b_j)`, symmetric family only
    Flipped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Link {
    pub source: usize,
    pub end: usize,
    pub variant: LinkVariant,
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.source, self.end)
    }
}

/// A set of links with distinct sources and distinct ends, sorted by source.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContractionSet {
    links: Vec<Link>,
}

impl ContractionSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a contraction set from `(source, end)` pairs, checking each
    /// against the links of `g` and the matching condition.
    pub fn resolve(g: &GMatrix, family: ObjectFamily, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut links = Vec::with_capacity(pairs.len());
        for &(source, end) in pairs {
            let variant = g
                .link_variant(family, source, end)
                .ok_or_else(|| Error::InvalidContraction(format!("({source},{end}) is not a link of {g}")))?;
            links.push(Link { source, end, variant });
        }
        let set = ContractionSet::from_links(links);
        set.check_matching()?;
        Ok(set)
    }

    fn from_links(mut links: Vec<Link>) -> Self {
        links.sort();
        ContractionSet { links }
    }

    fn check_matching(&self) -> Result<()> {
        for (x, l) in self.links.iter().enumerate() {
            for m in &self.links[x + 1..] {
                if l.source == m.source || l.end == m.end {
                    return Err(Error::InvalidContraction(format!("{self} repeats a source or an end")));
                }
            }
        }
        Ok(())
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.links.iter().map(|l| (l.source, l.end)).collect()
    }

    pub fn by_source(&self, i: usize) -> Option<&Link> {
        self.links.iter().find(|l| l.source == i)
    }

    pub fn by_end(&self, j: usize) -> Option<&Link> {
        self.links.iter().find(|l| l.end == j)
    }

    pub fn is_source(&self, i: usize) -> bool {
        self.by_source(i).is_some()
    }

    pub fn is_end(&self, j: usize) -> bool {
        self.by_end(j).is_some()
    }
}

impl fmt::Display for ContractionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.links.iter().map(|l| l.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairGK {
    pub g: GMatrix,
    pub k: ContractionSet,
}

impl PairGK {
    pub fn new(g: GMatrix, k: ContractionSet) -> Self {
        PairGK { g, k }
    }

    fn validate(&self, family: ObjectFamily) -> Result<()> {
        self.g.validate(family)?;
        let pairs = self.k.pairs();
        let resolved = ContractionSet::resolve(&self.g, family, &pairs)?;
        if resolved != self.k {
            return Err(Error::InvalidContraction(format!("{} has stale link variants", self.k)));
        }
        Ok(())
    }
}

impl fmt::Display for PairGK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}; K={}]", self.g, self.k)
    }
}

/// Which rule of the involution applies at the pivot column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseTag {
    /// The pivot is the source of a direct link in `K`.
    #[serde(rename = "1")]
    One,
    /// The pivot column carries `d = 1`.
    #[serde(rename = "2")]
    Two,
    /// Flipped link, `a_i ≠ i`, `b_i ≠ i`, `d_i = 0`.
    #[serde(rename = "3'")]
    ThreePrime,
    /// Flipped link, `a_i = i`, `b_i ≠ i`, `d_i = 0`.
    #[serde(rename = "3''")]
    ThreeDoublePrime,
    /// Flipped link, `a_i ≠ i`, `b_i = i`, `d_i = 2`.
    #[serde(rename = "3'''")]
    ThreeTriplePrime,
}

impl CaseTag {
    /// The case the involution's image must fall into.
    pub fn partner(self) -> CaseTag {
        match self {
            CaseTag::One => CaseTag::Two,
            CaseTag::Two => CaseTag::One,
            CaseTag::ThreePrime => CaseTag::ThreePrime,
            CaseTag::ThreeDoublePrime => CaseTag::ThreeTriplePrime,
            CaseTag::ThreeTriplePrime => CaseTag::ThreeDoublePrime,
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseTag::One => "1",
            CaseTag::Two => "2",
            CaseTag::ThreePrime => "3'",
            CaseTag::ThreeDoublePrime => "3''",
            CaseTag::ThreeTriplePrime => "3'''",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pivot {
    pub index: usize,
    pub case: CaseTag,
}

/// Every valid object of `family` whose first row is `a` (1-based), ordered
/// lexicographically by `d` then `b`.
pub fn objects_with_permutation(family: ObjectFamily, a: &[usize]) -> Vec<GMatrix> {
    let n = a.len();
    let d_choices: Vec<Vec<u8>> = (1..=n)
        .map(|i| {
            let mut ds = vec![0u8];
            if a[i - 1] == i && i < n {
                ds.push(1);
            }
            if family == ObjectFamily::Turnbull {
                ds.push(2);
            }
            ds
        })
        .collect();
    let mut out = Vec::new();
    for d in cartesian(&d_choices) {
        let b_choices: Vec<Vec<usize>> = (1..=n)
            .map(|i| match d[i - 1] {
                0 => (1..=n).collect(),
                1 => (i + 1..=n).collect(),
                _ => vec![i],
            })
            .collect();
        for b in cartesian(&b_choices) {
            out.push(GMatrix { n, a: a.to_vec(), b, d: d.clone() });
        }
    }
    out
}

/// Lexicographic cartesian product.
fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    if choices.iter().any(|c| c.is_empty()) {
        return Vec::new();
    }
    let mut idx = vec![0usize; choices.len()];
    let mut out = Vec::new();
    loop {
        out.push(idx.iter().zip(choices).map(|(&k, c)| c[k].clone()).collect());
        let mut pos = choices.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < choices[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

fn one_based_permutations(n: usize) -> Vec<Vec<usize>> {
    permutations(n).into_iter().map(|p| p.into_iter().map(|v| v + 1).collect()).collect()
}

/// Streams every object of the family, ordered lexicographically by `(a, d, b)`.
pub fn enumerate_objects(family: ObjectFamily, n: usize, limits: &Limits) -> Result<impl Iterator<Item = GMatrix>> {
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    limits.check(n)?;
    Ok(one_based_permutations(n).into_iter().flat_map(move |a| objects_with_permutation(family, &a)))
}

pub fn links_of(g: &GMatrix, family: ObjectFamily) -> Result<Vec<Link>> {
    g.validate(family)?;
    Ok(links_unchecked(g, family))
}

fn links_unchecked(g: &GMatrix, family: ObjectFamily) -> Vec<Link> {
    let mut out = Vec::new();
    for i in 1..=g.n {
        for j in i + 1..=g.n {
            if let Some(variant) = g.link_variant(family, i, j) {
                out.push(Link { source: i, end: j, variant });
            }
        }
    }
    out
}

/// All partial matchings of the links of `g`, ordered by size then lexicographically.
pub fn contraction_sets(g: &GMatrix, family: ObjectFamily) -> Result<Vec<ContractionSet>> {
    let links = links_of(g, family)?;
    Ok(matchings(&links))
}

fn matchings(links: &[Link]) -> Vec<ContractionSet> {
    fn go(links: &[Link], chosen: &mut Vec<Link>, out: &mut Vec<ContractionSet>) {
        let Some((first, rest)) = links.split_first() else {
            out.push(ContractionSet::from_links(chosen.clone()));
            return;
        };
        go(rest, chosen, out);
        if chosen.iter().all(|l| l.source != first.source && l.end != first.end) {
            chosen.push(*first);
            go(rest, chosen, out);
            chosen.pop();
        }
    }
    let mut out = Vec::new();
    go(links, &mut Vec::new(), &mut out);
    out.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    out
}

fn var_id(kind: Kind, i: usize, j: usize, family: ObjectFamily, n: usize) -> VarId {
    canonical_variable(kind, i, j, family.mode(), n)
        .ok()
        .and_then(|v| v.generator())
        .map(|g| g.id)
        .expect("validated objects name nonzero in-range variables")
}

/// `sgn(a) Π_i (x[b_i,a_i] p[b_i,i] if d_i even, h if d_i = 1)` as an ordered word.
pub fn weight_of(g: &GMatrix, family: ObjectFamily) -> Result<Polynomial> {
    g.validate(family)?;
    let space = Space::new(family.mode(), g.n)?;
    let mut w = Polynomial::scalar(space, g.sign() as i64, 0);
    for i in 1..=g.n {
        let factor = if g.d(i) == 1 {
            Polynomial::scalar(space, 1, 1)
        } else {
            Polynomial::x(space, g.b(i), g.a(i))?.mul(&Polynomial::p(space, g.b(i), i)?)?
        };
        w = w.mul(&factor)?;
    }
    Ok(w)
}

/// The monomial selected by `k` in the normal-ordered weight of `g`: one `h`
/// per `d = 1` column and per link, the positions of non-ends and the
/// momenta of non-sources.
pub fn weight_of_pair(g: &GMatrix, k: &ContractionSet, family: ObjectFamily) -> Result<NormalMonomial> {
    PairGK::new(g.clone(), k.clone()).validate(family)?;
    Ok(pair_weight_unchecked(g, k, family))
}

fn pair_weight_unchecked(g: &GMatrix, k: &ContractionSet, family: ObjectFamily) -> NormalMonomial {
    let n = g.n;
    let mut h_power = k.len() as u32;
    let mut x_part = Vec::with_capacity(n);
    let mut p_part = Vec::with_capacity(n);
    for i in 1..=n {
        if g.d(i) == 1 {
            h_power += 1;
            continue;
        }
        if !k.is_end(i) {
            x_part.push(var_id(Kind::X, g.b(i), g.a(i), family, n));
        }
        if !k.is_source(i) {
            p_part.push(var_id(Kind::P, g.b(i), i, family, n));
        }
    }
    NormalMonomial::new(g.sign() as i64, MonomialKey::new(h_power, x_part, p_part))
}

/// Good pairs have no `d = 1` column and an empty `K`.
pub fn is_good(pair: &PairGK) -> bool {
    pair.k.is_empty() && !pair.g.d.contains(&1)
}

pub fn pivot_index(pair: &PairGK, family: ObjectFamily) -> Result<Option<Pivot>> {
    pair.validate(family)?;
    pivot_unchecked(pair, family)
}

fn pivot_unchecked(pair: &PairGK, family: ObjectFamily) -> Result<Option<Pivot>> {
    let g = &pair.g;
    for i in (1..g.n).rev() {
        if g.d(i) == 1 {
            return Ok(Some(Pivot { index: i, case: CaseTag::Two }));
        }
        let Some(link) = pair.k.by_source(i) else {
            continue;
        };
        let j = link.end;
        let case = match family {
            ObjectFamily::Capelli => CaseTag::One,
            ObjectFamily::Turnbull if g.d(i) == 0 && g.direct_holds(i, j) => CaseTag::One,
            ObjectFamily::Turnbull if g.flipped_holds(i, j) => match (g.a(i) == i, g.b(i) == i, g.d(i)) {
                (false, false, 0) => CaseTag::ThreePrime,
                (true, false, 0) => CaseTag::ThreeDoublePrime,
                (false, true, 2) => CaseTag::ThreeTriplePrime,
                _ => return Err(Error::Invariant(format!("unclassifiable flipped link at column {i} of {pair}"))),
            },
            ObjectFamily::Turnbull => {
                return Err(Error::Invariant(format!("link ({i},{j}) of {pair} satisfies neither condition")))
            }
        };
        return Ok(Some(Pivot { index: i, case }));
    }
    if is_good(pair) {
        Ok(None)
    } else {
        Err(Error::Invariant(format!("bad pair {pair} has no pivot")))
    }
}

/// Applies the sign-reversing involution to a bad pair, returning the image
/// and the case that was applied.
pub fn involution(pair: &PairGK, family: ObjectFamily) -> Result<(PairGK, CaseTag)> {
    pair.validate(family)?;
    involution_unchecked(pair, family)
}

fn involution_unchecked(pair: &PairGK, family: ObjectFamily) -> Result<(PairGK, CaseTag)> {
    let pivot = pivot_unchecked(pair, family)?.ok_or(Error::GoodPair)?;
    let i = pivot.index;
    let g = &pair.g;
    let mut g2 = g.clone();
    let mut pairs = pair.k.pairs();
    let (ai, bi) = (g.a(i), g.b(i));

    match pivot.case {
        CaseTag::One => {
            let j = pair.k.by_source(i).expect("case 1 pivot is a source").end;
            g2.set_column(i, i, j, 1);
            g2.set_column(j, ai, bi, g.d(j));
            pairs.retain(|&(s, _)| s != i);
            for p in pairs.iter_mut().filter(|p| p.1 == i) {
                p.1 = j;
            }
        }
        CaseTag::Two => {
            let j = bi;
            let (aj, bj) = (g.a(j), g.b(j));
            g2.set_column(i, aj, bj, 0);
            g2.set_column(j, i, bj, g.d(j));
            for p in pairs.iter_mut().filter(|p| p.1 == j) {
                p.1 = i;
            }
            pairs.push((i, j));
        }
        CaseTag::ThreePrime => {
            let j = pair.k.by_source(i).expect("case 3 pivot is a source").end;
            g2.set_column(i, bi, ai, 0);
            g2.set_column(j, ai, i, g.d(j));
        }
        CaseTag::ThreeDoublePrime => {
            let j = pair.k.by_source(i).expect("case 3 pivot is a source").end;
            g2.set_column(i, bi, i, 2);
            g2.set_column(j, i, i, g.d(j));
        }
        CaseTag::ThreeTriplePrime => {
            let j = pair.k.by_source(i).expect("case 3 pivot is a source").end;
            g2.set_column(i, i, ai, 0);
            g2.set_column(j, ai, i, g.d(j));
        }
    }

    let bad = |e: Error| Error::Invariant(format!("image of {pair} under case {} is invalid: {e}", pivot.case));
    g2.validate(family).map_err(bad)?;
    let k2 = ContractionSet::resolve(&g2, family, &pairs).map_err(bad)?;
    Ok((PairGK::new(g2, k2), pivot.case))
}

/// Every `(G, K)` for one object, with its weight.
fn pairs_of(g: &GMatrix, family: ObjectFamily) -> impl Iterator<Item = (PairGK, NormalMonomial)> + '_ {
    matchings(&links_unchecked(g, family)).into_iter().map(move |k| {
        let w = pair_weight_unchecked(g, &k, family);
        (PairGK::new(g.clone(), k), w)
    })
}

fn sum_pairs(family: ObjectFamily, n: usize, limits: &Limits, keep: fn(&PairGK) -> bool) -> Result<NormalPolynomial> {
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    limits.check(n)?;
    Ok(one_based_permutations(n)
        .par_iter()
        .map(|a| {
            let mut acc = NormalPolynomial::zero();
            for g in objects_with_permutation(family, a) {
                for (pair, w) in pairs_of(&g, family) {
                    if keep(&pair) {
                        acc.add_monomial(w);
                    }
                }
            }
            acc
        })
        .reduce(NormalPolynomial::zero, NormalPolynomial::merge))
}

/// `Σ_G Σ_K w(G,K)` over the whole family.
pub fn combinatorial_lhs(family: ObjectFamily, n: usize, limits: &Limits) -> Result<NormalPolynomial> {
    sum_pairs(family, n, limits, |_| true)
}

/// Sum of the weights of the good pairs only.
pub fn good_guy_sum(family: ObjectFamily, n: usize, limits: &Limits) -> Result<NormalPolynomial> {
    sum_pairs(family, n, limits, is_good)
}

/// Sum of the weights of the bad pairs only.
pub fn bad_guy_sum(family: ObjectFamily, n: usize, limits: &Limits) -> Result<NormalPolynomial> {
    sum_pairs(family, n, limits, |p| !is_good(p))
}

/// A bad pair together with its image; listed once, from the smaller side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orbit {
    pub pair: PairGK,
    pub case: CaseTag,
    pub weight: String,
    pub image: PairGK,
    pub image_case: CaseTag,
    pub image_weight: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub property: String,
    pub pair: PairGK,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct InvolutionReport {
    pub family: ObjectFamily,
    pub n: usize,
    pub objects: usize,
    pub good_pairs: usize,
    pub bad_pairs: usize,
    /// Two-element orbits of the involution, each counted once.
    pub orbits: usize,
    /// Bad pairs by the case applied to them.
    pub case_counts: BTreeMap<CaseTag, usize>,
    pub violations: Vec<Violation>,
    pub good_sum: NormalPolynomial,
    pub bad_sum: NormalPolynomial,
    /// Populated only when requested.
    pub orbit_list: Vec<Orbit>,
}

impl InvolutionReport {
    fn empty(family: ObjectFamily, n: usize) -> Self {
        InvolutionReport {
            family,
            n,
            objects: 0,
            good_pairs: 0,
            bad_pairs: 0,
            orbits: 0,
            case_counts: BTreeMap::new(),
            violations: Vec::new(),
            good_sum: NormalPolynomial::zero(),
            bad_sum: NormalPolynomial::zero(),
            orbit_list: Vec::new(),
        }
    }

    fn merge(mut self, other: InvolutionReport) -> Self {
        self.objects += other.objects;
        self.good_pairs += other.good_pairs;
        self.bad_pairs += other.bad_pairs;
        self.orbits += other.orbits;
        for (k, v) in other.case_counts {
            *self.case_counts.entry(k).or_default() += v;
        }
        self.violations.extend(other.violations);
        self.good_sum = self.good_sum.merge(other.good_sum);
        self.bad_sum = self.bad_sum.merge(other.bad_sum);
        self.orbit_list.extend(other.orbit_list);
        self
    }

    /// Sum over all pairs.
    pub fn total_sum(&self) -> NormalPolynomial {
        self.good_sum.clone().merge(self.bad_sum.clone())
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.bad_sum.is_zero() && self.bad_pairs == 2 * self.orbits
    }

    /// Pass/fail per checked property.
    pub fn property_summary(&self) -> Vec<(&'static str, bool)> {
        let failed = |name: &str| self.violations.iter().any(|v| v.property == name);
        vec![
            ("valid image", !failed(PROP_VALID)),
            ("fixed-point free", !failed(PROP_FIXED)),
            ("involutive", !failed(PROP_INVOLUTIVE)),
            ("weight negated", !failed(PROP_WEIGHT)),
            ("pivot preserved", !failed(PROP_PIVOT)),
            ("case exchange", !failed(PROP_CASE)),
            ("orbits of size 2", self.bad_pairs == 2 * self.orbits),
            ("bad sum vanishes", self.bad_sum.is_zero()),
        ]
    }
}

const PROP_VALID: &str = "valid image";
const PROP_FIXED: &str = "fixed-point free";
const PROP_INVOLUTIVE: &str = "involutive";
const PROP_WEIGHT: &str = "weight negated";
const PROP_PIVOT: &str = "pivot preserved";
const PROP_CASE: &str = "case exchange";

fn check_pair(
    pair: &PairGK,
    weight: &NormalMonomial,
    family: ObjectFamily,
    keep_orbits: bool,
    report: &mut InvolutionReport,
) {
    let mut violate = |property: &str, detail: String| {
        report.violations.push(Violation { property: property.to_string(), pair: pair.clone(), detail });
    };
    let pivot = match pivot_unchecked(pair, family) {
        Ok(Some(p)) => p,
        Ok(None) => return violate(PROP_VALID, "bad pair classified as good".into()),
        Err(e) => return violate(PROP_VALID, e.to_string()),
    };
    let (image, case) = match involution_unchecked(pair, family) {
        Ok(r) => r,
        Err(e) => return violate(PROP_VALID, e.to_string()),
    };
    if is_good(&image) {
        violate(PROP_VALID, format!("image {image} is good"));
    }
    if &image == pair {
        violate(PROP_FIXED, "pair is fixed".into());
    }
    let image_weight = pair_weight_unchecked(&image.g, &image.k, family);
    if image_weight != weight.neg() {
        violate(PROP_WEIGHT, format!("w = {weight}, w' = {image_weight}"));
    }
    match pivot_unchecked(&image, family) {
        Ok(Some(p2)) => {
            if p2.index != pivot.index {
                violate(PROP_PIVOT, format!("pivot {} became {}", pivot.index, p2.index));
            }
            if p2.case != case.partner() {
                violate(PROP_CASE, format!("case {case} mapped to case {}", p2.case));
            }
        }
        Ok(None) => {}
        Err(e) => violate(PROP_PIVOT, e.to_string()),
    }
    match involution_unchecked(&image, family) {
        Ok((back, _)) if &back == pair => {}
        Ok((back, _)) => violate(PROP_INVOLUTIVE, format!("applying twice gives {back}")),
        Err(e) => violate(PROP_INVOLUTIVE, e.to_string()),
    }
    *report.case_counts.entry(case).or_default() += 1;
    if pair < &image {
        report.orbits += 1;
        if keep_orbits {
            report.orbit_list.push(Orbit {
                pair: pair.clone(),
                case,
                weight: weight.to_string(),
                image_case: case.partner(),
                image,
                image_weight: image_weight.to_string(),
            });
        }
    }
}

/// Runs the involution over every bad pair and checks that it is a
/// fixed-point-free, weight-negating, pivot-preserving involution with the
/// expected case exchange, and that the bad weights cancel.
pub fn check_involution_properties(family: ObjectFamily, n: usize, limits: &Limits) -> Result<InvolutionReport> {
    check_involution_properties_with(family, n, limits, false)
}

pub fn check_involution_properties_with(
    family: ObjectFamily,
    n: usize,
    limits: &Limits,
    keep_orbits: bool,
) -> Result<InvolutionReport> {
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    limits.check(n)?;
    let shards: Vec<InvolutionReport> = one_based_permutations(n)
        .par_iter()
        .map(|a| {
            let mut report = InvolutionReport::empty(family, n);
            for g in objects_with_permutation(family, a) {
                report.objects += 1;
                for (pair, w) in pairs_of(&g, family) {
                    if is_good(&pair) {
                        report.good_pairs += 1;
                        report.good_sum.add_monomial(w);
                    } else {
                        report.bad_pairs += 1;
                        check_pair(&pair, &w, family, keep_orbits, &mut report);
                        report.bad_sum.add_monomial(w);
                    }
                }
            }
            report
        })
        .collect();
    Ok(shards.into_iter().fold(InvolutionReport::empty(family, n), InvolutionReport::merge))
}
