//! Finite presentations of rational cohomology rings `H*(M; Q)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::poly::Poly2;

/// A basis element of `H*(M)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingElement {
    pub name: String,
    pub degree: u32,
}

/// Linear combination of basis elements, keyed by basis index.
pub type RingVector = BTreeMap<usize, BigRational>;

/// The cohomology ring of a connected manifold with its cup product.
///
/// Products are stored for ordered pairs `(a, b)` with `a <= b` in basis order
/// only; the other order is recovered through graded commutativity. A ring
/// value may violate the ring axioms (see [`CohomologyRing::validate`]);
/// [`parse_ring`] and the presets only ever hand out valid rings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyRing {
    dim: u32,
    closed: bool,
    oriented: bool,
    connectivity_override: Option<u32>,
    basis: Vec<RingElement>,
    products: BTreeMap<(usize, usize), RingVector>,
}

/// One violated ring invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateName(String),
    DegreeAboveDimension {
        name: String,
    },
    /// The number of degree-0 basis elements is not one.
    DegreeZeroCount(usize),
    /// A stored product pair with `a > b`.
    UnorderedPair {
        a: String,
        b: String,
    },
    Grading {
        a: String,
        b: String,
        c: String,
    },
    /// `x ∪ x ≠ 0` for `x` of odd degree.
    Commutativity {
        a: String,
    },
    Unit {
        a: String,
    },
    Associativity {
        a: String,
        b: String,
        c: String,
    },
    TopClassCount(usize),
    PoincareDuality {
        p: u32,
    },
    Connectivity {
        requested: u32,
        derived: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateName(n) => write!(f, "duplicate basis name `{n}`"),
            Violation::DegreeAboveDimension { name } => {
                write!(f, "`{name}` has degree above the manifold dimension")
            }
            Violation::DegreeZeroCount(n) => {
                write!(f, "expected exactly one degree-0 basis element, found {n}")
            }
            Violation::UnorderedPair { a, b } => {
                write!(f, "product ({a}, {b}) is stored against basis order")
            }
            Violation::Grading { a, b, c } => {
                write!(f, "grading: {a} ∪ {b} has a term in {c} of the wrong degree")
            }
            Violation::Commutativity { a } => {
                write!(f, "graded commutativity: {a} ∪ {a} must vanish for odd {a}")
            }
            Violation::Unit { a } => write!(f, "unit: 1 ∪ {a} ≠ {a}"),
            Violation::Associativity { a, b, c } => {
                write!(f, "associativity fails on ({a}, {b}, {c})")
            }
            Violation::TopClassCount(n) => {
                write!(f, "closed oriented ring needs one top-degree class, found {n}")
            }
            Violation::PoincareDuality { p } => {
                write!(f, "Poincaré duality: pairing in degree {p} is not perfect")
            }
            Violation::Connectivity { requested, derived } => write!(
                f,
                "connectivity {requested} contradicts the basis (lowest positive degree {derived})"
            ),
        }
    }
}

/// All violated invariants of a ring; empty means valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", lines.join("; "))
    }
}

fn koszul(p: u32, q: u32) -> bool {
    p % 2 == 1 && q % 2 == 1
}

impl CohomologyRing {
    /// Assemble a ring without checking it. Product keys must be basis indices.
    pub fn from_parts(
        dim: u32,
        closed: bool,
        oriented: bool,
        basis: Vec<RingElement>,
        products: BTreeMap<(usize, usize), RingVector>,
    ) -> Self {
        let products = products
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().filter(|(_, c)| !c.is_zero()).collect::<RingVector>()))
            .filter(|(_, v)| !v.is_empty())
            .collect();
        Self {
            dim,
            closed,
            oriented,
            connectivity_override: None,
            basis,
            products,
        }
    }

    pub fn with_connectivity(mut self, h: u32) -> Self {
        self.connectivity_override = Some(h);
        self
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn is_oriented(&self) -> bool {
        self.oriented
    }

    pub fn basis(&self) -> &[RingElement] {
        &self.basis
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.basis.iter().position(|e| e.name == name)
    }

    pub fn degree(&self, idx: usize) -> u32 {
        self.basis[idx].degree
    }

    /// The stored product entries, `a <= b`.
    pub fn stored_products(&self) -> impl Iterator<Item = (&(usize, usize), &RingVector)> {
        self.products.iter()
    }

    /// `x_a ∪ x_b` for any ordered pair.
    pub fn product(&self, a: usize, b: usize) -> RingVector {
        if a <= b {
            return self.products.get(&(a, b)).cloned().unwrap_or_default();
        }
        let mut v = self.products.get(&(b, a)).cloned().unwrap_or_default();
        if koszul(self.degree(a), self.degree(b)) {
            for c in v.values_mut() {
                *c = -&*c;
            }
        }
        v
    }

    /// Product of two linear combinations.
    pub fn multiply(&self, x: &RingVector, y: &RingVector) -> RingVector {
        let mut out = RingVector::new();
        for (a, ca) in x {
            for (b, cb) in y {
                for (c, k) in self.product(*a, *b) {
                    *out.entry(c).or_insert_with(BigRational::zero) += ca * cb * k;
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Betti numbers `β_0 .. β_dim`.
    pub fn betti(&self) -> Vec<u64> {
        let mut b = vec![0u64; self.dim as usize + 1];
        for e in &self.basis {
            if let Some(slot) = b.get_mut(e.degree as usize) {
                *slot += 1;
            }
        }
        b
    }

    /// Total Betti number `β(M)`.
    pub fn total_betti(&self) -> usize {
        self.basis.len()
    }

    pub fn poincare(&self) -> Poly2 {
        let coeffs: Vec<i64> = self.betti().into_iter().map(|b| b as i64).collect();
        Poly2::from_t_coeffs(&coeffs)
    }

    pub fn euler_char(&self) -> i64 {
        self.betti()
            .iter()
            .enumerate()
            .map(|(i, &b)| if i % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum()
    }

    /// Cohomological dimension: the top degree with non-zero cohomology.
    pub fn cd(&self) -> u32 {
        self.basis.iter().map(|e| e.degree).max().unwrap_or(0)
    }

    fn lowest_positive_degree(&self) -> Option<u32> {
        self.basis.iter().map(|e| e.degree).filter(|&d| d > 0).min()
    }

    /// `h` such that `M` is `(h-1)`-connected. Derived from the basis unless an
    /// override was supplied; a ring with no positive-degree class reports its
    /// dimension.
    pub fn connectivity(&self) -> u32 {
        self.connectivity_override
            .or_else(|| self.lowest_positive_degree())
            .unwrap_or(self.dim.max(1))
    }

    /// True when every positive even Betti number vanishes.
    pub fn has_odd_cohomology(&self) -> bool {
        self.basis.iter().all(|e| e.degree == 0 || e.degree % 2 == 1)
    }

    /// True when every Betti number sits in an even degree.
    pub fn has_even_cohomology(&self) -> bool {
        self.basis.iter().all(|e| e.degree % 2 == 0)
    }

    fn unit_index(&self) -> Option<usize> {
        let zeros: Vec<usize> = (0..self.basis.len()).filter(|&i| self.degree(i) == 0).collect();
        (zeros.len() == 1).then(|| zeros[0])
    }

    /// Check every ring invariant and list the violations.
    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        let name = |i: usize| self.basis[i].name.clone();

        let mut seen = HashMap::new();
        for e in &self.basis {
            if seen.insert(e.name.as_str(), ()).is_some() {
                out.push(Violation::DuplicateName(e.name.clone()));
            }
            if e.degree > self.dim {
                out.push(Violation::DegreeAboveDimension { name: e.name.clone() });
            }
        }

        let zero_count = self.basis.iter().filter(|e| e.degree == 0).count();
        if zero_count != 1 {
            out.push(Violation::DegreeZeroCount(zero_count));
        }

        for (&(a, b), v) in &self.products {
            if a > b {
                out.push(Violation::UnorderedPair { a: name(a), b: name(b) });
            }
            for &c in v.keys() {
                if self.degree(c) != self.degree(a) + self.degree(b) {
                    out.push(Violation::Grading {
                        a: name(a),
                        b: name(b),
                        c: name(c),
                    });
                }
            }
            if a == b && self.degree(a) % 2 == 1 {
                out.push(Violation::Commutativity { a: name(a) });
            }
        }

        if let Some(u) = self.unit_index() {
            for a in 0..self.basis.len() {
                let expected: RingVector = [(a, BigRational::one())].into_iter().collect();
                if self.product(u, a) != expected {
                    out.push(Violation::Unit { a: name(a) });
                }
            }
        }

        let n = self.basis.len();
        'assoc: for a in 0..n {
            for b in 0..n {
                let ab = self.product(a, b);
                for c in 0..n {
                    let unit_c: RingVector = [(c, BigRational::one())].into_iter().collect();
                    let unit_a: RingVector = [(a, BigRational::one())].into_iter().collect();
                    let left = self.multiply(&ab, &unit_c);
                    let right = self.multiply(&unit_a, &self.product(b, c));
                    if left != right {
                        out.push(Violation::Associativity {
                            a: name(a),
                            b: name(b),
                            c: name(c),
                        });
                        if out.len() > 64 {
                            break 'assoc;
                        }
                    }
                }
            }
        }

        if self.closed && self.oriented {
            let tops: Vec<usize> = (0..n).filter(|&i| self.degree(i) == self.dim).collect();
            if tops.len() != 1 {
                out.push(Violation::TopClassCount(tops.len()));
            } else {
                let top = tops[0];
                for p in 0..=self.dim {
                    if !self.pairing_is_perfect(p, top) {
                        out.push(Violation::PoincareDuality { p });
                    }
                }
            }
        }

        if let (Some(h), Some(low)) = (self.connectivity_override, self.lowest_positive_degree()) {
            if h == 0 || h > low {
                out.push(Violation::Connectivity {
                    requested: h,
                    derived: low,
                });
            }
        }

        ValidationReport { violations: out }
    }

    fn pairing_is_perfect(&self, p: u32, top: usize) -> bool {
        let left: Vec<usize> = (0..self.basis.len()).filter(|&i| self.degree(i) == p).collect();
        let right: Vec<usize> = (0..self.basis.len())
            .filter(|&i| self.degree(i) == self.dim - p)
            .collect();
        if left.len() != right.len() {
            return false;
        }
        let triplets = left.iter().enumerate().flat_map(|(r, &a)| {
            right
                .iter()
                .enumerate()
                .filter_map(move |(c, &b)| self.product(a, b).get(&top).map(|v| (r, c, v.clone())))
        });
        let m = SparseMatrix::from_triplets(left.len(), right.len(), triplets).expect("indices in range");
        m.rank() == left.len()
    }
}

// ---------------------------------------------------------------------------
// File format

#[derive(Serialize, Deserialize)]
struct RingDoc {
    dim: u32,
    closed: bool,
    oriented: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    connectivity: Option<u32>,
    basis: Vec<RingElement>,
    #[serde(default)]
    products: Vec<ProductDoc>,
}

#[derive(Serialize, Deserialize)]
struct ProductDoc {
    a: String,
    b: String,
    terms: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    c: String,
    coeff: String,
}

/// Parse `p/q` or `p` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::BadCoefficient(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let valid = |x: &str| {
        let digits = x.strip_prefix('-').or_else(|| x.strip_prefix('+')).unwrap_or(x);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(num) || !valid(den) {
        return Err(bad());
    }
    let n: num_bigint::BigInt = num.parse().map_err(|_| bad())?;
    let d: num_bigint::BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Read a ring description (JSON) and validate it.
pub fn parse_ring(document: &str) -> Result<CohomologyRing> {
    let doc: RingDoc = serde_json::from_str(document).map_err(|e| Error::from_json(&e))?;

    let mut index = HashMap::new();
    for (i, e) in doc.basis.iter().enumerate() {
        if index.insert(e.name.clone(), i).is_some() {
            return Err(Error::DuplicateName(e.name.clone()));
        }
    }
    let lookup = |n: &str| index.get(n).copied().ok_or_else(|| Error::UnknownName(n.to_string()));

    let mut products: BTreeMap<(usize, usize), RingVector> = BTreeMap::new();
    for p in &doc.products {
        let (a, b) = (lookup(&p.a)?, lookup(&p.b)?);
        if a > b {
            return Err(Error::InvalidRing(format!(
                "product ({}, {}) must be listed as ({}, {})",
                p.a, p.b, p.b, p.a
            )));
        }
        if products.contains_key(&(a, b)) {
            return Err(Error::InvalidRing(format!("product ({}, {}) listed twice", p.a, p.b)));
        }
        let mut v = RingVector::new();
        for t in &p.terms {
            *v.entry(lookup(&t.c)?).or_insert_with(BigRational::zero) += parse_rational(&t.coeff)?;
        }
        products.insert((a, b), v);
    }
    // Products with the unit may be left out.
    let zeros: Vec<usize> = (0..doc.basis.len()).filter(|&i| doc.basis[i].degree == 0).collect();
    if let [u] = zeros[..] {
        for i in 0..doc.basis.len() {
            let key = (u.min(i), u.max(i));
            products
                .entry(key)
                .or_insert_with(|| [(i, BigRational::one())].into_iter().collect());
        }
    }

    let mut ring = CohomologyRing::from_parts(doc.dim, doc.closed, doc.oriented, doc.basis, products);
    ring.connectivity_override = doc.connectivity;
    let report = ring.validate();
    if !report.is_valid() {
        return Err(Error::InvalidRing(report.to_string()));
    }
    Ok(ring)
}

/// Serialize a ring in the same JSON format [`parse_ring`] reads.
pub fn emit_ring(ring: &CohomologyRing) -> String {
    let doc = RingDoc {
        dim: ring.dim,
        closed: ring.closed,
        oriented: ring.oriented,
        connectivity: ring.connectivity_override,
        basis: ring.basis.clone(),
        products: ring
            .products
            .iter()
            .map(|(&(a, b), v)| ProductDoc {
                a: ring.basis[a].name.clone(),
                b: ring.basis[b].name.clone(),
                terms: v
                    .iter()
                    .map(|(&c, q)| TermDoc {
                        c: ring.basis[c].name.clone(),
                        coeff: format_rational(q),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("ring document serializes")
}
