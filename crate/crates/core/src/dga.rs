//! The graded-commutative algebra `Ω*(k) = Sym^k(V ⊕ W)` and its differential.
//!
//! Monomials are stored in sorted form, factors strictly increasing in the
//! generator order of the model. Signs never live in a monomial: they are
//! carried by the coefficients of linear combinations.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::linalg::SparseMatrix;
use crate::model::KnudsenModel;
use crate::poly::Poly2;

/// A canonical monomial `g_1^{e_1} ⋯ g_r^{e_r}` over the unified generator
/// index of a model.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    factors: Vec<(u32, u32)>,
    degree: u32,
    length: u32,
    weight: u32,
}

/// Sparse linear combination of monomials.
pub type Combination = BTreeMap<Monomial, BigRational>;

impl Monomial {
    pub fn one() -> Self {
        Self {
            factors: Vec::new(),
            degree: 0,
            length: 0,
            weight: 0,
        }
    }

    /// Build from sorted `(generator, exponent)` pairs. Returns `None` if the
    /// factors are not strictly increasing, an exponent is zero, or an odd
    /// generator is repeated.
    pub fn new(model: &KnudsenModel, factors: Vec<(u32, u32)>) -> Option<Self> {
        let increasing = factors.windows(2).all(|w| w[0].0 < w[1].0);
        let exponents_ok = factors.iter().all(|&(g, e)| {
            (g as usize) < model.num_generators() && e >= 1 && (e == 1 || !model.generator(g as usize).is_odd())
        });
        (increasing && exponents_ok).then(|| Self::from_factors_unchecked(model, factors))
    }

    fn from_factors_unchecked(model: &KnudsenModel, factors: Vec<(u32, u32)>) -> Self {
        let (mut degree, mut length, mut weight) = (0, 0, 0);
        for &(g, e) in &factors {
            let gen = model.generator(g as usize);
            degree += e * gen.degree;
            length += e * gen.length();
            weight += e * gen.weight();
        }
        Self {
            factors,
            degree,
            length,
            weight,
        }
    }

    /// The single generator `g`.
    pub fn generator(model: &KnudsenModel, g: usize) -> Self {
        Self::from_factors_unchecked(model, vec![(g as u32, 1)])
    }

    pub fn factors(&self) -> &[(u32, u32)] {
        &self.factors
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn length(&self) -> u32 {
        self.length
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn display<'a>(&'a self, model: &'a KnudsenModel) -> MonomialDisplay<'a> {
        MonomialDisplay { monomial: self, model }
    }
}

pub struct MonomialDisplay<'a> {
    monomial: &'a Monomial,
    model: &'a KnudsenModel,
}

impl fmt::Display for MonomialDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomial.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .monomial
            .factors
            .iter()
            .map(|&(g, e)| {
                let name = &self.model.generator(g as usize).name;
                if e == 1 {
                    name.clone()
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("·"))
    }
}

/// Sign of moving the factors of `y` past those of `x`, and the merged
/// monomial; `None` when an odd generator would appear twice.
pub fn multiply(model: &KnudsenModel, x: &Monomial, y: &Monomial) -> Option<(Monomial, bool)> {
    let odd = |g: u32| model.generator(g as usize).is_odd();
    let mut out = Vec::with_capacity(x.factors.len() + y.factors.len());
    let mut negative = false;
    // Odd factors of x not yet emitted; each odd factor of y passes them all.
    let mut odd_left_in_x = x.factors.iter().filter(|f| odd(f.0)).count();
    let (mut i, mut j) = (0, 0);
    while i < x.factors.len() || j < y.factors.len() {
        let take_x = match (x.factors.get(i), y.factors.get(j)) {
            (Some(a), Some(b)) if a.0 == b.0 => {
                if odd(a.0) {
                    return None;
                }
                out.push((a.0, a.1 + b.1));
                i += 1;
                j += 1;
                continue;
            }
            (Some(a), Some(b)) => a.0 < b.0,
            (Some(_), None) => true,
            (None, _) => false,
        };
        if take_x {
            let f = x.factors[i];
            if odd(f.0) {
                odd_left_in_x -= 1;
            }
            out.push(f);
            i += 1;
        } else {
            let f = y.factors[j];
            if odd(f.0) && odd_left_in_x % 2 == 1 {
                negative = !negative;
            }
            out.push(f);
            j += 1;
        }
    }
    Some((Monomial::from_factors_unchecked(model, out), negative))
}

/// Multiply an ordered list of monomials, returning the canonical product
/// with its Koszul sign.
pub fn normalize_product(model: &KnudsenModel, parts: &[Monomial]) -> Option<(Monomial, bool)> {
    parts.iter().try_fold((Monomial::one(), false), |(acc, sign), m| {
        multiply(model, &acc, m).map(|(p, s)| (p, sign ^ s))
    })
}

pub fn multiply_combinations(model: &KnudsenModel, x: &Combination, y: &Combination) -> Combination {
    let mut out = Combination::new();
    for (a, ca) in x {
        for (b, cb) in y {
            if let Some((p, neg)) = multiply(model, a, b) {
                let c = ca * cb;
                add_into(&mut out, p, if neg { -c } else { c });
            }
        }
    }
    out
}

fn add_into(out: &mut Combination, m: Monomial, c: BigRational) {
    let e = out.entry(m.clone()).or_insert_with(BigRational::zero);
    *e += c;
    if e.is_zero() {
        out.remove(&m);
    }
}

/// `∂` of the canonical `v_a v_b` (or `v_a²`) quadratic term.
fn quadratic(model: &KnudsenModel, a: usize, b: usize) -> Monomial {
    let factors = if a == b {
        vec![(a as u32, 2)]
    } else {
        vec![(a as u32, 1), (b as u32, 1)]
    };
    Monomial::from_factors_unchecked(model, factors)
}

/// `∂μ`, extending `∂|_V = 0`, `∂|_W = ∂_W` as a degree-one derivation.
pub fn differential(model: &KnudsenModel, mu: &Monomial) -> Combination {
    let nv = model.v_gens().len() as u32;
    let mut out = Combination::new();
    let mut prefix_degree = 0u32;
    for (j, &(g, e)) in mu.factors.iter().enumerate() {
        let gen = model.generator(g as usize);
        if g >= nv {
            let prefix = &mu.factors[..j];
            let mut left = prefix.to_vec();
            if e > 1 {
                left.push((g, e - 1));
            }
            let left = Monomial::from_factors_unchecked(model, left);
            let right = Monomial::from_factors_unchecked(model, mu.factors[j + 1..].to_vec());
            let base_negative = prefix_degree % 2 == 1;
            let multiplicity = BigRational::from_integer(e.into());
            for term in model.dw((g - nv) as usize) {
                let q = quadratic(model, term.a, term.b);
                if let Some((m, neg)) = normalize_product(model, &[left.clone(), q, right.clone()]) {
                    let c = &term.coeff * &multiplicity;
                    add_into(&mut out, m, if neg ^ base_negative { -c } else { c });
                }
            }
        }
        prefix_degree += e * gen.degree;
    }
    out
}

pub fn differential_of_combination(model: &KnudsenModel, x: &Combination) -> Combination {
    let mut out = Combination::new();
    for (m, c) in x {
        for (n, d) in differential(model, m) {
            add_into(&mut out, n, c * d);
        }
    }
    out
}

/// Bigrading of a slice: `(degree, weight)`.
pub type SliceKey = (u32, u32);

/// The monomial basis of `Ω*(k)` split by `(degree, weight)`.
#[derive(Clone, Debug)]
pub struct GradedBasis {
    k: usize,
    slices: BTreeMap<SliceKey, Vec<Monomial>>,
}

impl GradedBasis {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn slice(&self, degree: u32, weight: u32) -> &[Monomial] {
        self.slices.get(&(degree, weight)).map_or(&[], Vec::as_slice)
    }

    pub fn slices(&self) -> impl Iterator<Item = (SliceKey, &[Monomial])> {
        self.slices.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    pub fn dimension(&self) -> usize {
        self.slices.values().map(Vec::len).sum()
    }

    /// Slice dimensions as a polynomial in `t` (degree) and `s` (weight).
    pub fn dimension_series(&self) -> Poly2 {
        Poly2::from_terms(self.slices.iter().map(|(&(i, w), v)| ((i, w), v.len() as i64)))
    }

    /// Debug dump of one slice, one monomial per line.
    pub fn dump_slice(&self, model: &KnudsenModel, degree: u32, weight: u32) -> String {
        self.slice(degree, weight)
            .iter()
            .map(|m| format!("{}\n", m.display(model)))
            .collect()
    }
}

/// All canonical monomials of length `k`, sliced by degree and weight.
pub fn enumerate_basis(model: &KnudsenModel, k: usize) -> GradedBasis {
    let mut slices: BTreeMap<SliceKey, Vec<Monomial>> = BTreeMap::new();
    let mut current = Vec::new();
    enumerate_rec(model, 0, k as u32, &mut current, &mut |factors| {
        let m = Monomial::from_factors_unchecked(model, factors.to_vec());
        slices.entry((m.degree, m.weight)).or_default().push(m);
    });
    for v in slices.values_mut() {
        v.sort();
    }
    GradedBasis { k, slices }
}

fn enumerate_rec<F: FnMut(&[(u32, u32)])>(
    model: &KnudsenModel,
    g: usize,
    remaining: u32,
    current: &mut Vec<(u32, u32)>,
    emit: &mut F,
) {
    if remaining == 0 {
        emit(current);
        return;
    }
    if g == model.num_generators() {
        return;
    }
    let gen = model.generator(g);
    let len = gen.length();
    let max = if gen.is_odd() {
        1.min(remaining / len)
    } else {
        remaining / len
    };
    enumerate_rec(model, g + 1, remaining, current, emit);
    for e in 1..=max {
        current.push((g as u32, e));
        enumerate_rec(model, g + 1, remaining - e * len, current, emit);
        current.pop();
    }
}

/// Slice dimensions of `Ω*(k)` from the generating function
/// `Π_even (1 - u^ℓ t^d s^w)^{-1} · Π_odd (1 + u^ℓ t^d s^w)`, coefficient of `u^k`.
pub fn hilbert_series(model: &KnudsenModel, k: usize) -> Poly2 {
    // series[l] = coefficient of u^l
    let mut series: Vec<Poly2> = vec![Poly2::zero(); k + 1];
    series[0] = Poly2::one();
    for g in 0..model.num_generators() {
        let gen = model.generator(g);
        let len = gen.length() as usize;
        let factor = Poly2::monomial(gen.degree, gen.weight(), 1);
        if gen.is_odd() {
            for l in (len..=k).rev() {
                let add = series[l - len].mul(&factor);
                series[l] = &series[l] + &add;
            }
        } else {
            // Multiplying by 1/(1 - x) is the running sum s[l] += x·s[l - len].
            for l in len..=k {
                let add = series[l - len].mul(&factor);
                series[l] = &series[l] + &add;
            }
        }
    }
    series.swap_remove(k)
}

/// Matrix of `∂` from slice `(degree, weight)` to slice `(degree + 1, weight - 1)`.
/// Rows index the target slice, columns the source slice.
pub fn differential_matrix(model: &KnudsenModel, basis: &GradedBasis, degree: u32, weight: u32) -> SparseMatrix {
    let source = basis.slice(degree, weight);
    if weight == 0 {
        return SparseMatrix::zero(0, source.len());
    }
    let target = basis.slice(degree + 1, weight - 1);
    let index: HashMap<&Monomial, usize> = target.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let cols = source
        .iter()
        .map(|mu| {
            let mut col: Vec<(usize, BigRational)> = differential(model, mu)
                .into_iter()
                .map(|(m, c)| (*index.get(&m).expect("∂ lands in the target slice"), c))
                .collect();
            col.sort_by_key(|(r, _)| *r);
            col
        })
        .collect();
    SparseMatrix::from_columns(target.len(), cols)
}

/// Single-term combination `1 · μ`.
pub fn unit_combination(mu: Monomial) -> Combination {
    [(mu, BigRational::one())].into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_closed_oriented_model;
    use crate::presets;

    fn sphere2() -> KnudsenModel {
        build_closed_oriented_model(&presets::sphere(2)).unwrap()
    }

    /// Generator index by display name: v0, v2, w1, w3 for the 2-sphere.
    fn gens_s2(model: &KnudsenModel) -> [u32; 4] {
        let find = |n: &str| {
            (0..model.num_generators())
                .find(|&g| model.generator(g).name == n)
                .unwrap() as u32
        };
        [find("v_e2"), find("v_1"), find("w_e2"), find("w_1")]
    }

    fn mono(model: &KnudsenModel, f: &[(u32, u32)]) -> Monomial {
        Monomial::new(model, f.to_vec()).unwrap()
    }

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn sphere_k2_basis() {
        let model = sphere2();
        let [v0, v2, w1, w3] = gens_s2(&model);
        let basis = enumerate_basis(&model, 2);
        assert_eq!(basis.dimension(), 5);
        assert_eq!(basis.slice(0, 0), &[mono(&model, &[(v0, 2)])]);
        assert_eq!(basis.slice(2, 0), &[mono(&model, &[(v0, 1), (v2, 1)])]);
        assert_eq!(basis.slice(4, 0), &[mono(&model, &[(v2, 2)])]);
        assert_eq!(basis.slice(1, 1), &[mono(&model, &[(w1, 1)])]);
        assert_eq!(basis.slice(3, 1), &[mono(&model, &[(w3, 1)])]);
    }

    #[test]
    fn k1_basis_is_v() {
        for ring in [presets::sphere(2), presets::product_p1_p1(), presets::torus(2)] {
            let model = build_closed_oriented_model(&ring).unwrap();
            let basis = enumerate_basis(&model, 1);
            assert_eq!(basis.dimension(), model.v_gens().len());
            assert!(basis.slices().all(|((_, w), _)| w == 0));
        }
    }

    #[test]
    fn sphere_hilbert_series() {
        let model = sphere2();
        assert_eq!(hilbert_series(&model, 2).to_string(), "1 + t^2 + t^4 + st + st^3");
        assert_eq!(hilbert_series(&model, 1).to_string(), "1 + t^2");
    }

    #[test]
    fn p1p1_k4_dimension() {
        let model = build_closed_oriented_model(&presets::product_p1_p1()).unwrap();
        // Σ_j C(4,j)·C(7-2j,3) = 35 + 40 + 6
        assert_eq!(enumerate_basis(&model, 4).dimension(), 81);
    }

    #[test]
    fn sphere_k2_matrices() {
        let model = sphere2();
        let basis = enumerate_basis(&model, 2);
        assert_eq!(
            differential_matrix(&model, &basis, 1, 1),
            SparseMatrix::from_rows(&[vec![2]])
        );
        assert_eq!(
            differential_matrix(&model, &basis, 3, 1),
            SparseMatrix::from_rows(&[vec![1]])
        );
        let zero = differential_matrix(&model, &basis, 2, 0);
        assert_eq!((zero.nrows(), zero.ncols()), (0, 1));
    }

    #[test]
    fn sphere_k3_hand_expansion() {
        let model = sphere2();
        let [v0, v2, w1, w3] = gens_s2(&model);
        let d = |f: &[(u32, u32)]| differential(&model, &mono(&model, f));
        let combo = |terms: &[(&[(u32, u32)], i64)]| -> Combination {
            terms.iter().map(|(f, c)| (mono(&model, f), q(*c))).collect()
        };
        assert_eq!(d(&[(v0, 1), (w1, 1)]), combo(&[(&[(v0, 2), (v2, 1)], 2)]));
        assert_eq!(d(&[(v2, 1), (w1, 1)]), combo(&[(&[(v0, 1), (v2, 2)], 2)]));
        assert_eq!(d(&[(v2, 1), (w3, 1)]), combo(&[(&[(v2, 3)], 1)]));
        // ∂(w1 w3) = ∂w1·w3 - w1·∂w3 = 2 v0 v2 w3 - v2² w1
        let dw = d(&[(w1, 1), (w3, 1)]);
        assert_eq!(
            dw,
            combo(&[(&[(v0, 1), (v2, 1), (w3, 1)], 2), (&[(v2, 2), (w1, 1)], -1)])
        );
        assert!(differential_of_combination(&model, &dw).is_empty());
    }

    #[test]
    fn multiply_signs() {
        let model = sphere2();
        let [_, v2, w1, w3] = gens_s2(&model);
        let a = Monomial::generator(&model, w3 as usize);
        let b = Monomial::generator(&model, w1 as usize);
        let (p, neg) = multiply(&model, &a, &b).unwrap();
        assert_eq!(p, mono(&model, &[(w1, 1), (w3, 1)]));
        assert!(neg);
        assert!(multiply(&model, &b, &b).is_none());
        let c = Monomial::generator(&model, v2 as usize);
        let (_, neg) = multiply(&model, &a, &c).unwrap();
        assert!(!neg);
    }
}
