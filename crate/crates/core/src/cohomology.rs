//! Bigraded Betti numbers `β_{i,j}(C_k(M))` by rank counting on the slices
//! of `Ω*(k)`.
//!
//! The weight `j` of a class is the weight of the model: `∂` takes slice
//! `(i, j)` to `(i + 1, j - 1)`, so each anti-diagonal `i + j = const` is a
//! finite cochain complex and
//! `β_{i,j} = dim ker ∂|_{(i,j)} - rank ∂|_{(i-1,j+1)}`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::dga::{differential_matrix, enumerate_basis, SliceKey};
use crate::error::{Error, Result};
use crate::model::{build_closed_oriented_model, odd_symmetric_power, KnudsenModel};
use crate::poly::Poly2;
use crate::ring::CohomologyRing;

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Where a table came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub method: String,
    pub model_hash: String,
    pub engine_version: String,
}

impl Provenance {
    pub fn model(model: &KnudsenModel) -> Self {
        Self {
            method: "knudsen-model".into(),
            model_hash: model.content_hash(),
            engine_version: ENGINE_VERSION.into(),
        }
    }

    pub fn odd_symmetric(ring: &CohomologyRing) -> Self {
        Self {
            method: "odd-symmetric-power".into(),
            model_hash: ring_hash(ring),
            engine_version: ENGINE_VERSION.into(),
        }
    }

    pub fn point() -> Self {
        Self {
            method: "point".into(),
            model_hash: String::new(),
            engine_version: ENGINE_VERSION.into(),
        }
    }
}

fn ring_hash(ring: &CohomologyRing) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(crate::ring::emit_ring(ring).as_bytes());
    hex::encode(&digest[..8])
}

/// `β_{i,j}(C_k(M))`, zeros absent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BettiTable2 {
    k: usize,
    betti: BTreeMap<(u32, u32), u64>,
    provenance: Provenance,
}

impl BettiTable2 {
    pub fn new(k: usize, betti: BTreeMap<(u32, u32), u64>, provenance: Provenance) -> Self {
        let betti = betti.into_iter().filter(|(_, b)| *b > 0).collect();
        Self { k, betti, provenance }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: u32, j: u32) -> u64 {
        self.betti.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((u32, u32), u64)> + '_ {
        self.betti.iter().map(|(&k, &v)| (k, v))
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn poincare(&self) -> Poly2 {
        poincare2(self)
    }

    /// Total Betti number in degree `i`, summed over weights.
    pub fn total(&self, i: u32) -> u64 {
        self.betti.iter().filter(|((d, _), _)| *d == i).map(|(_, b)| b).sum()
    }
}

/// Cohomology of `Ω*(k)` bigraded by (degree, weight).
pub fn betti_bigraded(model: &KnudsenModel, k: usize) -> BettiTable2 {
    let basis = enumerate_basis(model, k);
    let keys: Vec<SliceKey> = basis.slices().map(|(key, _)| key).collect();
    let ranks: BTreeMap<SliceKey, usize> = keys
        .par_iter()
        .map(|&(i, j)| ((i, j), differential_matrix(model, &basis, i, j).rank()))
        .collect();
    let betti = basis
        .slices()
        .map(|((i, j), monos)| {
            let kernel = monos.len() - ranks[&(i, j)];
            let image = match i.checked_sub(1) {
                Some(prev) => ranks.get(&(prev, j + 1)).copied().unwrap_or(0),
                None => 0,
            };
            ((i, j), (kernel - image) as u64)
        })
        .collect();
    BettiTable2::new(k, betti, Provenance::model(model))
}

/// `P(t, s) = Σ β_{i,j} t^i s^j`.
pub fn poincare2(table: &BettiTable2) -> Poly2 {
    Poly2::from_terms(table.betti.iter().map(|(&k, &b)| (k, b as i64)))
}

/// `P^{[q]}`: the terms whose `t`-degree lies in the top `q` degrees
/// `τ - q + 1 ..= τ`, where `τ` is the top degree of `p`.
pub fn truncate(p: &Poly2, q: u32) -> Result<Poly2> {
    let top = p
        .top_t_degree()
        .ok_or_else(|| Error::Unsupported("cannot truncate the zero polynomial".into()))?;
    if q == 0 {
        return Ok(Poly2::zero());
    }
    Ok(p.t_window((top + 1).saturating_sub(q), top))
}

/// `χ = P(-1, 1)`.
pub fn euler_char(p: &Poly2) -> i64 {
    p.eval(-1, 1)
}

/// Something whose configuration-space cohomology can be computed.
#[derive(Clone, Debug)]
pub enum Source {
    Ring(CohomologyRing),
    Model(KnudsenModel),
}

impl Source {
    pub fn ring(&self) -> Option<&CohomologyRing> {
        match self {
            Source::Ring(r) => Some(r),
            Source::Model(_) => None,
        }
    }
}

/// Prepared pipeline: picks the symmetric-power formula for odd dimension,
/// the Knudsen model for even dimension and handles the point separately.
#[derive(Clone, Debug)]
pub enum Engine {
    Odd(CohomologyRing),
    Even(KnudsenModel),
    Point,
}

impl Engine {
    pub fn new(source: &Source) -> Result<Self> {
        match source {
            Source::Model(m) => Ok(Engine::Even(m.clone())),
            Source::Ring(r) if r.dim() == 0 => Ok(Engine::Point),
            Source::Ring(r) if r.dim() % 2 == 1 => Ok(Engine::Odd(r.clone())),
            Source::Ring(r) => Ok(Engine::Even(build_closed_oriented_model(r)?)),
        }
    }

    pub fn model(&self) -> Option<&KnudsenModel> {
        match self {
            Engine::Even(m) => Some(m),
            _ => None,
        }
    }

    pub fn table(&self, k: usize) -> Result<BettiTable2> {
        if k == 0 {
            return Err(Error::Unsupported("k must be at least 1".into()));
        }
        match self {
            Engine::Odd(r) => odd_symmetric_power(r, k),
            Engine::Even(m) => Ok(betti_bigraded(m, k)),
            // C_1(pt) = pt, and C_k(pt) is empty for k >= 2.
            Engine::Point => {
                let betti = if k == 1 {
                    [((0, 0), 1)].into_iter().collect()
                } else {
                    BTreeMap::new()
                };
                Ok(BettiTable2::new(k, betti, Provenance::point()))
            }
        }
    }

    /// Tables for `k_min..=k_max`, computed in parallel and returned in order.
    pub fn tables(&self, k_min: usize, k_max: usize) -> Result<Vec<BettiTable2>> {
        (k_min..=k_max).into_par_iter().map(|k| self.table(k)).collect()
    }
}

// ---------------------------------------------------------------------------
// Output formats

#[derive(Serialize)]
struct JsonEntry {
    i: u32,
    j: u32,
    b: u64,
}

#[derive(Serialize)]
struct JsonTable<'a> {
    k: usize,
    betti: Vec<JsonEntry>,
    provenance: &'a Provenance,
}

/// `{k, betti: [{i, j, b}], provenance}` for each table, as a JSON array.
pub fn tables_to_json(tables: &[BettiTable2]) -> String {
    let docs: Vec<JsonTable> = tables
        .iter()
        .map(|t| JsonTable {
            k: t.k,
            betti: t.entries().map(|((i, j), b)| JsonEntry { i, j, b }).collect(),
            provenance: &t.provenance,
        })
        .collect();
    serde_json::to_string_pretty(&docs).expect("tables serialize")
}

/// `k,i,j,b` rows with a header line.
pub fn tables_to_csv(tables: &[BettiTable2]) -> String {
    let mut out = String::from("k,i,j,b\n");
    for t in tables {
        for ((i, j), b) in t.entries() {
            out.push_str(&format!("{},{i},{j},{b}\n", t.k));
        }
    }
    out
}
