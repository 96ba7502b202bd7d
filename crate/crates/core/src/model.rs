//! The generators `V*`, `W*` and the quadratic differential `∂_W` of the
//! Félix–Thomas / Knudsen model, plus the odd-dimensional `Sym^k` formula.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cohomology::{BettiTable2, Provenance};
use crate::error::{Error, Result};
use crate::ring::{format_rational, parse_rational, CohomologyRing};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GenKind {
    /// Length 1, weight 0.
    V,
    /// Length 2, weight 1.
    W,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModelGenerator {
    pub name: String,
    pub degree: u32,
    pub kind: GenKind,
}

impl ModelGenerator {
    pub fn length(&self) -> u32 {
        match self.kind {
            GenKind::V => 1,
            GenKind::W => 2,
        }
    }

    pub fn weight(&self) -> u32 {
        match self.kind {
            GenKind::V => 0,
            GenKind::W => 1,
        }
    }

    pub fn is_odd(&self) -> bool {
        self.degree % 2 == 1
    }
}

/// One term `coeff · v_a v_b` of `∂_W(w)`, with `a <= b` indexing `v_gens`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DwTerm {
    pub a: usize,
    pub b: usize,
    pub coeff: BigRational,
}

/// `(V*, W*, ∂_W)` for a manifold of dimension `2m`.
///
/// Generators are kept in the canonical total order used for monomials:
/// every V-generator precedes every W-generator, and within each list the
/// order is ascending degree with ties broken by name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnudsenModel {
    two_m: u32,
    v_gens: Vec<ModelGenerator>,
    w_gens: Vec<ModelGenerator>,
    dw: Vec<Vec<DwTerm>>,
}

/// `∂_W` given by generator names, with terms in any order.
pub type NamedDifferential = Vec<(String, Vec<(String, String, BigRational)>)>;

impl KnudsenModel {
    /// Validate and normalize a model. `v_gens` and `w_gens` are
    /// `(name, degree)` lists; `dw` may omit generators (their image is zero).
    pub fn new(
        two_m: u32,
        v_gens: Vec<(String, u32)>,
        w_gens: Vec<(String, u32)>,
        dw: NamedDifferential,
    ) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidModel(m));
        if two_m == 0 || two_m % 2 == 1 {
            return invalid(format!("two_m must be even and positive, got {two_m}"));
        }
        let m2 = two_m;
        let mut names = HashMap::new();
        for (n, _) in v_gens.iter().chain(&w_gens) {
            if names.insert(n.clone(), ()).is_some() {
                return Err(Error::DuplicateName(n.clone()));
            }
        }
        for (n, d) in &v_gens {
            if *d > m2 {
                return invalid(format!("v-generator {n} has degree {d} outside 0..={m2}"));
            }
        }
        for (n, d) in &w_gens {
            if *d + 1 < m2 || *d > 2 * m2 - 1 {
                return invalid(format!(
                    "w-generator {n} has degree {d} outside {}..={}",
                    m2 - 1,
                    2 * m2 - 1
                ));
            }
        }
        let zero_count = v_gens.iter().filter(|(_, d)| *d == 0).count();
        if zero_count != 1 {
            return invalid(format!(
                "expected exactly one v-generator of degree 0, found {zero_count}"
            ));
        }

        let sorted = |gens: Vec<(String, u32)>, kind| {
            let mut g: Vec<ModelGenerator> = gens
                .into_iter()
                .map(|(name, degree)| ModelGenerator { name, degree, kind })
                .collect();
            g.sort_by(|a, b| a.degree.cmp(&b.degree).then_with(|| a.name.cmp(&b.name)));
            g
        };
        let v_gens = sorted(v_gens, GenKind::V);
        let w_gens = sorted(w_gens, GenKind::W);
        let v_index: HashMap<&str, usize> = v_gens.iter().enumerate().map(|(i, g)| (g.name.as_str(), i)).collect();
        let w_index: HashMap<&str, usize> = w_gens.iter().enumerate().map(|(i, g)| (g.name.as_str(), i)).collect();

        let mut acc: Vec<BTreeMap<(usize, usize), BigRational>> = vec![BTreeMap::new(); w_gens.len()];
        let mut seen_w = HashMap::new();
        for (w, terms) in dw {
            let wi = *w_index.get(w.as_str()).ok_or_else(|| Error::UnknownName(w.clone()))?;
            if seen_w.insert(wi, ()).is_some() {
                return invalid(format!("differential of {w} listed twice"));
            }
            let wdeg = w_gens[wi].degree;
            for (a, b, c) in terms {
                let ai = *v_index.get(a.as_str()).ok_or_else(|| Error::UnknownName(a.clone()))?;
                let bi = *v_index.get(b.as_str()).ok_or_else(|| Error::UnknownName(b.clone()))?;
                let (da, db) = (v_gens[ai].degree, v_gens[bi].degree);
                if da + db != wdeg + 1 {
                    return invalid(format!(
                        "term {a}·{b} in ∂{w} has degree {} but ∂ must raise degree {wdeg} by one",
                        da + db
                    ));
                }
                let odd_pair = da % 2 == 1 && db % 2 == 1;
                let (lo, hi, c) = match ai.cmp(&bi) {
                    std::cmp::Ordering::Less => (ai, bi, c),
                    std::cmp::Ordering::Greater => (bi, ai, if odd_pair { -c } else { c }),
                    std::cmp::Ordering::Equal if odd_pair => continue,
                    std::cmp::Ordering::Equal => (ai, bi, c),
                };
                *acc[wi].entry((lo, hi)).or_insert_with(BigRational::zero) += c;
            }
        }
        let dw = acc
            .into_iter()
            .map(|m| {
                m.into_iter()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|((a, b), coeff)| DwTerm { a, b, coeff })
                    .collect()
            })
            .collect();
        Ok(Self {
            two_m,
            v_gens,
            w_gens,
            dw,
        })
    }

    pub fn two_m(&self) -> u32 {
        self.two_m
    }

    pub fn v_gens(&self) -> &[ModelGenerator] {
        &self.v_gens
    }

    pub fn w_gens(&self) -> &[ModelGenerator] {
        &self.w_gens
    }

    /// Number of generators in the unified order (V then W).
    pub fn num_generators(&self) -> usize {
        self.v_gens.len() + self.w_gens.len()
    }

    /// Generator by unified index.
    pub fn generator(&self, idx: usize) -> &ModelGenerator {
        if idx < self.v_gens.len() {
            &self.v_gens[idx]
        } else {
            &self.w_gens[idx - self.v_gens.len()]
        }
    }

    /// `∂_W` of the `j`-th w-generator.
    pub fn dw(&self, j: usize) -> &[DwTerm] {
        &self.dw[j]
    }

    /// `∂_W` of the w-generator called `name`, as `(v_a, v_b, coeff)` name triples.
    pub fn dw_named(&self, name: &str) -> Option<Vec<(String, String, BigRational)>> {
        let j = self.w_gens.iter().position(|g| g.name == name)?;
        Some(
            self.dw[j]
                .iter()
                .map(|t| {
                    (
                        self.v_gens[t.a].name.clone(),
                        self.v_gens[t.b].name.clone(),
                        t.coeff.clone(),
                    )
                })
                .collect(),
        )
    }

    /// Stable content hash of the canonical raw-model document.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(emit_raw_model(self).as_bytes());
        hex::encode(&digest[..8])
    }
}

impl fmt::Display for KnudsenModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |g: &[ModelGenerator]| {
            g.iter()
                .map(|x| format!("{}({})", x.name, x.degree))
                .collect::<Vec<_>>()
                .join(", ")
        };
        writeln!(f, "2m = {}", self.two_m)?;
        writeln!(f, "V = <{}>", names(&self.v_gens))?;
        writeln!(f, "W = <{}>", names(&self.w_gens))?;
        for (w, terms) in self.w_gens.iter().zip(&self.dw) {
            let rhs = if terms.is_empty() {
                "0".to_string()
            } else {
                terms
                    .iter()
                    .map(|t| {
                        let (a, b) = (&self.v_gens[t.a].name, &self.v_gens[t.b].name);
                        format!("{}·{a}·{b}", format_rational(&t.coeff))
                    })
                    .collect::<Vec<_>>()
                    .join(" + ")
            };
            writeln!(f, "∂{} = {rhs}", w.name)?;
        }
        Ok(())
    }
}

pub fn v_name(element: &str) -> String {
    format!("v_{element}")
}

pub fn w_name(element: &str) -> String {
    format!("w_{element}")
}

/// The model of a closed oriented `M^{2m}`: `∂` is dual to the cup product.
///
/// A class `x` of degree `p` gives `v(x)` of degree `2m - p` and `w(x)` of
/// degree `4m - 1 - p`, and `∂w(x_c) = Σ_{(a,b)} κ^c_{ab} v(x_a) v(x_b)` over
/// all ordered pairs, where `x_a ∪ x_b = Σ_c κ^c_{ab} x_c`.
pub fn build_closed_oriented_model(ring: &CohomologyRing) -> Result<KnudsenModel> {
    let n = ring.dim();
    if !ring.is_closed() || !ring.is_oriented() {
        return Err(Error::Unsupported(
            "the cup-product model needs a closed oriented manifold".into(),
        ));
    }
    if n == 0 || n % 2 == 1 {
        return Err(Error::Unsupported(format!(
            "the cup-product model needs positive even dimension, got {n}"
        )));
    }
    let report = ring.validate();
    if !report.is_valid() {
        return Err(Error::InvalidRing(report.to_string()));
    }

    let basis = ring.basis();
    let v_gens = basis.iter().map(|e| (v_name(&e.name), n - e.degree)).collect();
    let w_gens = basis.iter().map(|e| (w_name(&e.name), 2 * n - 1 - e.degree)).collect();

    let mut dw: Vec<Vec<(String, String, BigRational)>> = vec![Vec::new(); basis.len()];
    for a in 0..basis.len() {
        for b in 0..basis.len() {
            for (c, k) in ring.product(a, b) {
                dw[c].push((v_name(&basis[a].name), v_name(&basis[b].name), k));
            }
        }
    }
    let dw = basis.iter().map(|e| w_name(&e.name)).zip(dw).collect();
    KnudsenModel::new(n, v_gens, w_gens, dw)
}

// ---------------------------------------------------------------------------
// Raw-model file format

#[derive(Serialize, Deserialize)]
struct RawModelDoc {
    two_m: u32,
    v_gens: Vec<GenDoc>,
    w_gens: Vec<GenDoc>,
    #[serde(default, rename = "dW")]
    dw: Vec<DwDoc>,
}

#[derive(Serialize, Deserialize)]
struct GenDoc {
    name: String,
    degree: u32,
}

#[derive(Serialize, Deserialize)]
struct DwDoc {
    w: String,
    terms: Vec<DwTermDoc>,
}

#[derive(Serialize, Deserialize)]
struct DwTermDoc {
    a: String,
    b: String,
    coeff: String,
}

/// Read a user-supplied model (JSON).
pub fn load_raw_model(document: &str) -> Result<KnudsenModel> {
    let doc: RawModelDoc = serde_json::from_str(document).map_err(|e| Error::from_json(&e))?;
    let dw = doc
        .dw
        .into_iter()
        .map(|d| {
            let terms = d
                .terms
                .into_iter()
                .map(|t| Ok((t.a, t.b, parse_rational(&t.coeff)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok((d.w, terms))
        })
        .collect::<Result<Vec<_>>>()?;
    KnudsenModel::new(
        doc.two_m,
        doc.v_gens.into_iter().map(|g| (g.name, g.degree)).collect(),
        doc.w_gens.into_iter().map(|g| (g.name, g.degree)).collect(),
        dw,
    )
}

/// Serialize a model in canonical form; `load_raw_model` reads it back.
pub fn emit_raw_model(model: &KnudsenModel) -> String {
    let gens = |g: &[ModelGenerator]| {
        g.iter()
            .map(|x| GenDoc {
                name: x.name.clone(),
                degree: x.degree,
            })
            .collect()
    };
    let doc = RawModelDoc {
        two_m: model.two_m,
        v_gens: gens(&model.v_gens),
        w_gens: gens(&model.w_gens),
        dw: model
            .w_gens
            .iter()
            .zip(&model.dw)
            .filter(|(_, terms)| !terms.is_empty())
            .map(|(w, terms)| DwDoc {
                w: w.name.clone(),
                terms: terms
                    .iter()
                    .map(|t| DwTermDoc {
                        a: model.v_gens[t.a].name.clone(),
                        b: model.v_gens[t.b].name.clone(),
                        coeff: format_rational(&t.coeff),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("model document serializes")
}

// ---------------------------------------------------------------------------
// Odd dimension

/// `H*(C_k(M)) = Sym^k H*(M)` for odd-dimensional `M`: polynomial on the
/// even-degree classes, exterior on the odd ones. All classes sit in weight 0.
pub fn odd_symmetric_power(ring: &CohomologyRing, k: usize) -> Result<BettiTable2> {
    if ring.dim() % 2 == 0 {
        return Err(Error::Unsupported(format!(
            "the symmetric-power formula needs odd dimension, got {}",
            ring.dim()
        )));
    }
    let degrees: Vec<u32> = ring.basis().iter().map(|e| e.degree).collect();
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    sym_count(&degrees, 0, k, 0, &mut counts);
    let betti = counts.into_iter().map(|(i, b)| ((i, 0), b)).collect();
    Ok(BettiTable2::new(k, betti, Provenance::odd_symmetric(ring)))
}

/// Enumerate multisets of size `remaining` from `degrees[from..]`, odd degrees
/// at most once, tallying their total degree.
fn sym_count(degrees: &[u32], from: usize, remaining: usize, acc: u32, out: &mut BTreeMap<u32, u64>) {
    if remaining == 0 {
        *out.entry(acc).or_insert(0) += 1;
        return;
    }
    let Some(&d) = degrees.get(from) else {
        return;
    };
    let max = if d % 2 == 1 { 1 } else { remaining };
    for e in 0..=max {
        sym_count(degrees, from + 1, remaining - e, acc + e as u32 * d, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn named(model: &KnudsenModel, w: &str) -> Vec<(String, String, BigRational)> {
        model.dw_named(w).unwrap()
    }

    fn t(a: &str, b: &str, c: i64) -> (String, String, BigRational) {
        (a.to_string(), b.to_string(), q(c))
    }

    #[test]
    fn sphere_differentials() {
        for m in 1..=3 {
            let model = build_closed_oriented_model(&presets::sphere(2 * m)).unwrap();
            let top = format!("e{}", 2 * m);
            let degs: Vec<u32> = model.v_gens().iter().map(|g| g.degree).collect();
            assert_eq!(degs, vec![0, 2 * m]);
            let wdegs: Vec<u32> = model.w_gens().iter().map(|g| g.degree).collect();
            assert_eq!(wdegs, vec![2 * m - 1, 4 * m - 1]);
            // v_0 = v(top class), v_{2m} = v(unit)
            let (v0, v2m) = (v_name(&top), v_name("1"));
            assert_eq!(named(&model, &w_name(&top)), vec![t(&v0, &v2m, 2)]);
            assert_eq!(named(&model, &w_name("1")), vec![t(&v2m, &v2m, 1)]);
        }
    }

    #[test]
    fn projective_plane_differentials() {
        let model = build_closed_oriented_model(&presets::rational_projective_plane(1)).unwrap();
        let (v0, v2, v4) = (v_name("y"), v_name("x"), v_name("1"));
        // w_{4m-1} = w(y), w_{6m-1} = w(x), w_{8m-1} = w(1)
        assert_eq!(named(&model, &w_name("y")), vec![t(&v0, &v4, 2), t(&v2, &v2, 1)]);
        assert_eq!(named(&model, &w_name("x")), vec![t(&v2, &v4, 2)]);
        assert_eq!(named(&model, &w_name("1")), vec![t(&v4, &v4, 1)]);
    }

    #[test]
    fn p1p1_differentials() {
        let model = build_closed_oriented_model(&presets::product_p1_p1()).unwrap();
        let (v0, va, vb, v4) = (v_name("ab"), v_name("a"), v_name("b"), v_name("1"));
        // With the basis a, b, ab (a² = b² = 0) the degree-3 generator picks up
        // both orders of a ∪ b.
        assert_eq!(named(&model, &w_name("ab")), vec![t(&v0, &v4, 2), t(&va, &vb, 2)]);
        assert_eq!(named(&model, &w_name("a")), vec![t(&va, &v4, 2)]);
        assert_eq!(named(&model, &w_name("b")), vec![t(&vb, &v4, 2)]);
        assert_eq!(named(&model, &w_name("1")), vec![t(&v4, &v4, 1)]);
    }

    #[test]
    fn odd_squares_cancel() {
        let model = build_closed_oriented_model(&presets::torus(2)).unwrap();
        // a ∪ b = x1x2, b ∪ a = -x1x2; v(a), v(b) odd so both orders add up.
        let dtop = named(&model, &w_name("x1x2"));
        assert!(dtop.contains(&t(&v_name("x1"), &v_name("x2"), 2)));
        assert_eq!(model.v_gens().len(), 4);
        assert_eq!(model.w_gens().len(), 4);
    }

    #[test]
    fn builder_rejects_unsuitable_rings() {
        assert!(build_closed_oriented_model(&presets::sphere(3)).is_err());
        assert!(build_closed_oriented_model(&presets::point(0)).is_err());
    }

    #[test]
    fn raw_model_round_trip() {
        let model = build_closed_oriented_model(&presets::sphere(2)).unwrap();
        assert_eq!(load_raw_model(&emit_raw_model(&model)).unwrap(), model);
    }

    #[test]
    fn raw_model_errors() {
        let wrong_degree = r#"{"two_m": 2,
            "v_gens": [{"name": "v0", "degree": 0}, {"name": "v2", "degree": 2}],
            "w_gens": [{"name": "w1", "degree": 1}, {"name": "w3", "degree": 3}],
            "dW": [{"w": "w1", "terms": [{"a": "v2", "b": "v2", "coeff": "1"}]}]}"#;
        assert!(matches!(load_raw_model(wrong_degree), Err(Error::InvalidModel(_))));

        let no_v0 = r#"{"two_m": 2, "v_gens": [{"name": "v2", "degree": 2}], "w_gens": []}"#;
        assert!(matches!(load_raw_model(no_v0), Err(Error::InvalidModel(_))));

        let bad_coeff = wrong_degree.replace(r#""b": "v2", "coeff": "1""#, r#""b": "v0", "coeff": "x""#);
        assert!(matches!(load_raw_model(&bad_coeff), Err(Error::BadCoefficient(_))));
    }

    #[test]
    fn odd_symmetric_power_examples() {
        let s1 = presets::sphere(1);
        for k in 1..=6 {
            let p = odd_symmetric_power(&s1, k).unwrap().poincare();
            assert_eq!(p.to_string(), "1 + t");
        }
        let s3 = presets::sphere(3);
        assert_eq!(odd_symmetric_power(&s3, 2).unwrap().poincare().to_string(), "1 + t^3");
        let t3 = presets::torus(3);
        assert_eq!(
            odd_symmetric_power(&t3, 1).unwrap().poincare().to_string(),
            "1 + 3t + 3t^2 + t^3"
        );
        assert!(odd_symmetric_power(&presets::sphere(2), 1).is_err());
    }
}
