//! Exact sparse linear algebra over the rationals.
//!
//! Rank is computed by fraction-free integer elimination: each column is
//! scaled by the lcm of its denominators, then reduced against an echelon
//! of pivot vectors with content (gcd) removal after every step. Columns are
//! processed sparsest first and row coordinates are permuted so that the
//! least populated rows are eliminated first, which keeps fill-in low on the
//! differentials this crate produces.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Sparse matrix with exact rational entries, stored by column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    /// For each column, `(row, value)` pairs sorted by row; no stored zeros.
    cols: Vec<Vec<(usize, BigRational)>>,
}

impl SparseMatrix {
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            cols: vec![Vec::new(); ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.cols[i].push((i, BigRational::one()));
        }
        m
    }

    /// Build from `(row, col, value)` triplets; repeated positions are summed.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, BigRational)>,
    {
        let mut acc: Vec<BTreeMap<usize, BigRational>> = vec![BTreeMap::new(); ncols];
        for (r, c, v) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({r}, {c}) outside a {nrows}x{ncols} matrix"
                )));
            }
            *acc[c].entry(r).or_insert_with(BigRational::zero) += v;
        }
        Ok(Self {
            nrows,
            ncols,
            cols: acc
                .into_iter()
                .map(|col| col.into_iter().filter(|(_, v)| !v.is_zero()).collect())
                .collect(),
        })
    }

    /// Dense integer rows, mostly for tests.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let triplets = rows.iter().enumerate().flat_map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(move |(c, &v)| (r, c, BigRational::from_integer(v.into())))
        });
        Self::from_triplets(nrows, ncols, triplets).expect("rows have equal length")
    }

    /// Build from whole columns; each column must be sorted by row and zero free.
    pub(crate) fn from_columns(nrows: usize, cols: Vec<Vec<(usize, BigRational)>>) -> Self {
        debug_assert!(cols
            .iter()
            .all(|c| c.windows(2).all(|w| w[0].0 < w[1].0) && c.iter().all(|(r, v)| *r < nrows && !v.is_zero())));
        Self {
            nrows,
            ncols: cols.len(),
            cols,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(Vec::is_empty)
    }

    pub fn get(&self, row: usize, col: usize) -> BigRational {
        self.cols[col]
            .binary_search_by_key(&row, |(r, _)| *r)
            .map(|i| self.cols[col][i].1.clone())
            .unwrap_or_else(|_| BigRational::zero())
    }

    pub fn column(&self, col: usize) -> &[(usize, BigRational)] {
        &self.cols[col]
    }

    pub fn transpose(&self) -> Self {
        let triplets = self
            .cols
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |(r, v)| (c, *r, v.clone())));
        Self::from_triplets(self.ncols, self.nrows, triplets).expect("indices in range")
    }

    /// The product `self · rhs`.
    pub fn compose(&self, rhs: &SparseMatrix) -> Result<SparseMatrix> {
        if self.ncols != rhs.nrows {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}x{} with {}x{}",
                self.nrows, self.ncols, rhs.nrows, rhs.ncols
            )));
        }
        let cols = rhs
            .cols
            .iter()
            .map(|rcol| {
                let mut acc: BTreeMap<usize, BigRational> = BTreeMap::new();
                for (k, b) in rcol {
                    for (i, a) in &self.cols[*k] {
                        *acc.entry(*i).or_insert_with(BigRational::zero) += a * b;
                    }
                }
                acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect();
        Ok(Self::from_columns(self.nrows, cols))
    }

    /// Exact rank over the rationals.
    pub fn rank(&self) -> usize {
        let vectors = self.integer_columns();
        let order = self.row_order();
        echelon_rank(vectors, &order, IntegerField)
    }

    pub fn kernel_dim(&self) -> usize {
        self.ncols - self.rank()
    }

    /// Rank of the matrix reduced modulo the prime `p`. This never exceeds the
    /// rational rank and agrees with it for all but finitely many primes.
    ///
    /// Returns `None` when `p` divides a denominator of some entry.
    pub fn rank_mod(&self, p: u64) -> Option<usize> {
        let pb = BigInt::from(p);
        let mut vectors = Vec::with_capacity(self.ncols);
        for col in &self.cols {
            let mut v = Vec::with_capacity(col.len());
            for (r, x) in col {
                let den = x.denom().mod_floor(&pb).to_u64()?;
                if den == 0 {
                    return None;
                }
                let num = x.numer().mod_floor(&pb).to_u64()?;
                let val = mul_mod(num, inv_mod(den, p), p);
                if val != 0 {
                    v.push((*r, val));
                }
            }
            vectors.push(v);
        }
        let order = self.row_order();
        Some(echelon_rank(vectors, &order, PrimeField(p)))
    }

    /// Columns scaled to primitive integer vectors.
    fn integer_columns(&self) -> Vec<Vec<(usize, BigInt)>> {
        self.cols
            .iter()
            .map(|col| {
                let lcm = col.iter().fold(BigInt::one(), |acc, (_, v)| acc.lcm(v.denom()));
                let mut v: Vec<(usize, BigInt)> =
                    col.iter().map(|(r, x)| (*r, x.numer() * (&lcm / x.denom()))).collect();
                make_primitive(&mut v);
                v
            })
            .collect()
    }

    /// Row permutation: rows touched by fewer columns come first.
    fn row_order(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.nrows];
        for col in &self.cols {
            for (r, _) in col {
                counts[*r] += 1;
            }
        }
        let mut rows: Vec<usize> = (0..self.nrows).collect();
        rows.sort_by_key(|&r| (counts[r], r));
        let mut position = vec![0usize; self.nrows];
        for (pos, &r) in rows.iter().enumerate() {
            position[r] = pos;
        }
        position
    }
}

fn make_primitive(v: &mut [(usize, BigInt)]) {
    let mut g = BigInt::zero();
    for (_, x) in v.iter() {
        g = g.gcd(x);
        if g.is_one() {
            return;
        }
    }
    if g > BigInt::one() {
        for (_, x) in v.iter_mut() {
            *x /= &g;
        }
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Scalar arithmetic needed by the echelon reduction.
trait Elimination {
    type Scalar: Clone;
    fn is_zero(&self, x: &Self::Scalar) -> bool;
    /// `target ← α·target − β·pivot`, where the multipliers cancel the entry
    /// of `target` at the pivot's leading position `lead`.
    fn reduce(
        &self,
        target: &[(usize, Self::Scalar)],
        pivot: &[(usize, Self::Scalar)],
        lead_target: &Self::Scalar,
        lead_pivot: &Self::Scalar,
    ) -> Vec<(usize, Self::Scalar)>;
}

struct IntegerField;

impl Elimination for IntegerField {
    type Scalar = BigInt;

    fn is_zero(&self, x: &BigInt) -> bool {
        x.is_zero()
    }

    fn reduce(
        &self,
        target: &[(usize, BigInt)],
        pivot: &[(usize, BigInt)],
        lead_target: &BigInt,
        lead_pivot: &BigInt,
    ) -> Vec<(usize, BigInt)> {
        let g = lead_target.gcd(lead_pivot);
        let alpha = lead_pivot / &g;
        let beta = lead_target / &g;
        let mut out = merge_combine(
            target,
            pivot,
            |a| a * &alpha,
            |b| -(b * &beta),
            |a, b| a * &alpha - b * &beta,
        );
        out.retain(|(_, x)| !x.is_zero());
        make_primitive(&mut out);
        // Keep a canonical sign so that content stays small and deterministic.
        if out.first().is_some_and(|(_, x)| x.is_negative()) {
            for (_, x) in out.iter_mut() {
                *x = -&*x;
            }
        }
        out
    }
}

struct PrimeField(u64);

impl Elimination for PrimeField {
    type Scalar = u64;

    fn is_zero(&self, x: &u64) -> bool {
        *x == 0
    }

    fn reduce(
        &self,
        target: &[(usize, u64)],
        pivot: &[(usize, u64)],
        lead_target: &u64,
        lead_pivot: &u64,
    ) -> Vec<(usize, u64)> {
        let p = self.0;
        let factor = mul_mod(*lead_target, inv_mod(*lead_pivot, p), p);
        let neg = |b: &u64| (p - mul_mod(*b, factor, p)) % p;
        let mut out = merge_combine(target, pivot, |a| *a, neg, |a, b| (a + neg(b)) % p);
        out.retain(|(_, x)| *x != 0);
        out
    }
}

/// Merge two sparse vectors sorted by the same key order.
fn merge_combine<S, F, G, H>(a: &[(usize, S)], b: &[(usize, S)], only_a: F, only_b: G, both: H) -> Vec<(usize, S)>
where
    F: Fn(&S) -> S,
    G: Fn(&S) -> S,
    H: Fn(&S, &S) -> S,
{
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push((a[i].0, only_a(&a[i].1)));
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push((b[j].0, only_b(&b[j].1)));
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, both(&a[i].1, &b[j].1)));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(a[i..].iter().map(|(k, x)| (*k, only_a(x))));
    out.extend(b[j..].iter().map(|(k, x)| (*k, only_b(x))));
    out
}

/// Rank of a family of sparse vectors. Coordinates are relabelled through
/// `position` so that leading entries follow the chosen row order.
fn echelon_rank<E: Elimination>(vectors: Vec<Vec<(usize, E::Scalar)>>, position: &[usize], field: E) -> usize {
    let mut vectors: Vec<Vec<(usize, E::Scalar)>> = vectors
        .into_iter()
        .map(|v| {
            let mut w: Vec<(usize, E::Scalar)> = v
                .into_iter()
                .filter(|(_, x)| !field.is_zero(x))
                .map(|(r, x)| (position[r], x))
                .collect();
            w.sort_by_key(|(r, _)| *r);
            w
        })
        .filter(|v| !v.is_empty())
        .collect();
    vectors.sort_by_key(Vec::len);

    let mut pivots: HashMap<usize, Vec<(usize, E::Scalar)>> = HashMap::new();
    for mut v in vectors {
        while let Some((lead, lead_val)) = v.first().cloned() {
            match pivots.get(&lead) {
                Some(p) => {
                    let pv = p[0].1.clone();
                    v = field.reduce(&v, p, &lead_val, &pv);
                }
                None => {
                    pivots.insert(lead, v);
                    break;
                }
            }
        }
    }
    pivots.len()
}
