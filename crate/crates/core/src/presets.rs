//! Built-in cohomology rings.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ring::{CohomologyRing, RingElement, RingVector};

/// Description of a preset for listings.
#[derive(Clone, Debug, Serialize)]
pub struct PresetInfo {
    pub name: &'static str,
    pub aliases: &'static [&'static str],
    pub params: &'static str,
    pub poincare: &'static str,
    pub note: &'static str,
}

pub const PRESETS: &[PresetInfo] = &[
    PresetInfo {
        name: "sphere",
        aliases: &["s"],
        params: "n >= 1",
        poincare: "1 + t^n",
        note: "homology sphere S^n; strongly stable with range 3 for even n",
    },
    PresetInfo {
        name: "complex_projective",
        aliases: &["cpn", "cp"],
        params: "n >= 1",
        poincare: "1 + t^2 + ... + t^2n",
        note: "CP^n, truncated polynomial ring on a degree-2 class",
    },
    PresetInfo {
        name: "product_p1_p1",
        aliases: &["p1p1", "cp1xcp1"],
        params: "",
        poincare: "1 + 2t^2 + t^4",
        note: "CP^1 x CP^1; shifted stable with shift 2",
    },
    PresetInfo {
        name: "torus",
        aliases: &["t"],
        params: "n >= 1",
        poincare: "(1 + t)^n",
        note: "T^n, exterior ring on n degree-1 classes",
    },
    PresetInfo {
        name: "surface",
        aliases: &["sigma"],
        params: "g >= 0",
        poincare: "1 + 2g t + t^2",
        note: "closed orientable surface of genus g",
    },
    PresetInfo {
        name: "point",
        aliases: &["pt"],
        params: "[n >= 0] (default 0)",
        poincare: "1",
        note: "a point (n = 0) or a rationally acyclic open n-manifold",
    },
    PresetInfo {
        name: "rational_projective_plane",
        aliases: &["rpp", "hpp"],
        params: "m >= 1",
        poincare: "1 + t^2m + t^4m",
        note: "homology projective plane; strongly stable with range 4",
    },
];

fn canonical_name(name: &str) -> Option<&'static str> {
    let lower = name.to_ascii_lowercase();
    PRESETS
        .iter()
        .find(|p| p.name == lower || p.aliases.contains(&lower.as_str()))
        .map(|p| p.name)
}

fn one_param(name: &str, params: &[i64], min: i64) -> Result<u32> {
    match params {
        [v] if *v >= min => u32::try_from(*v).map_err(|_| param_err(name, "parameter too large")),
        [v] => Err(param_err(name, &format!("expected a value >= {min}, got {v}"))),
        _ => Err(param_err(
            name,
            &format!("expected one parameter, got {}", params.len()),
        )),
    }
}

fn param_err(name: &str, reason: &str) -> Error {
    Error::PresetParameter {
        name: name.to_string(),
        reason: reason.to_string(),
    }
}

/// Look up a preset ring by name (aliases accepted) and integer parameters.
pub fn preset(name: &str, params: &[i64]) -> Result<CohomologyRing> {
    let canonical = canonical_name(name).ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
    let ring = match canonical {
        "sphere" => sphere(one_param(canonical, params, 1)?),
        "complex_projective" => complex_projective(one_param(canonical, params, 1)?),
        "product_p1_p1" => {
            if !params.is_empty() {
                return Err(param_err(canonical, "takes no parameters"));
            }
            product_p1_p1()
        }
        "torus" => torus(one_param(canonical, params, 1)?),
        "surface" => surface(one_param(canonical, params, 0)?),
        "point" => match params {
            [] => point(0),
            _ => point(one_param(canonical, params, 0)?),
        },
        "rational_projective_plane" => rational_projective_plane(one_param(canonical, params, 1)?),
        _ => unreachable!("every canonical name is handled"),
    };
    debug_assert!(ring.validate().is_valid(), "{canonical}: {}", ring.validate());
    Ok(ring)
}

struct Builder {
    basis: Vec<RingElement>,
    products: BTreeMap<(usize, usize), RingVector>,
}

impl Builder {
    fn new() -> Self {
        Self {
            basis: vec![RingElement {
                name: "1".into(),
                degree: 0,
            }],
            products: BTreeMap::new(),
        }
    }

    fn element(&mut self, name: impl Into<String>, degree: u32) -> usize {
        self.basis.push(RingElement {
            name: name.into(),
            degree,
        });
        self.basis.len() - 1
    }

    /// Record `x_a ∪ x_b = coeff · x_c`, storing it under the ordered pair.
    fn product(&mut self, a: usize, b: usize, c: usize, coeff: i64) {
        let (lo, hi, sign) = if a <= b {
            (a, b, 1)
        } else {
            let odd = self.basis[a].degree % 2 == 1 && self.basis[b].degree % 2 == 1;
            (b, a, if odd { -1 } else { 1 })
        };
        self.products
            .entry((lo, hi))
            .or_default()
            .insert(c, BigRational::from_integer((coeff * sign).into()));
    }

    fn units(&mut self) {
        for i in 0..self.basis.len() {
            self.products.entry((0, i)).or_default().insert(i, BigRational::one());
        }
    }

    fn finish(mut self, dim: u32, closed: bool) -> CohomologyRing {
        self.units();
        CohomologyRing::from_parts(dim, closed, true, self.basis, self.products)
    }
}

pub fn sphere(n: u32) -> CohomologyRing {
    let mut b = Builder::new();
    b.element(format!("e{n}"), n);
    b.finish(n, true)
}

pub fn complex_projective(n: u32) -> CohomologyRing {
    let mut b = Builder::new();
    let powers: Vec<usize> = (1..=n).map(|i| b.element(format!("x{i}"), 2 * i)).collect();
    let idx = |i: u32| if i == 0 { 0 } else { powers[i as usize - 1] };
    for i in 1..=n {
        for j in i..=n - i {
            b.product(idx(i), idx(j), idx(i + j), 1);
        }
    }
    b.finish(2 * n, true)
}

/// `CP^1 × CP^1` with basis `1, a, b, ab`; `a² = b² = 0`.
pub fn product_p1_p1() -> CohomologyRing {
    let mut b = Builder::new();
    let x = b.element("a", 2);
    let y = b.element("b", 2);
    let top = b.element("ab", 4);
    b.product(x, y, top, 1);
    b.finish(4, true)
}

/// `T^n`: basis indexed by subsets of `{1..n}`, ordered by degree then lexicographically.
pub fn torus(n: u32) -> CohomologyRing {
    let mut subsets: Vec<Vec<u32>> = (0u64..1 << n)
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    let mut b = Builder::new();
    let mut index = BTreeMap::new();
    index.insert(Vec::new(), 0usize);
    for s in subsets.iter().skip(1) {
        let name = s.iter().map(|i| format!("x{}", i + 1)).collect::<String>();
        index.insert(s.clone(), b.element(name, s.len() as u32));
    }
    for s in &subsets {
        for t in &subsets {
            if s.is_empty() || t.is_empty() || s.iter().any(|i| t.contains(i)) {
                continue;
            }
            // Sign of sorting the concatenation s ++ t.
            let inversions = s.iter().map(|i| t.iter().filter(|j| *j < i).count()).sum::<usize>();
            let mut u: Vec<u32> = s.iter().chain(t).copied().collect();
            u.sort_unstable();
            let (a, c) = (index[s], index[t]);
            if a <= c {
                let sign = if inversions % 2 == 0 { 1 } else { -1 };
                b.product(a, c, index[&u], sign);
            }
        }
    }
    b.finish(n, true)
}

/// Genus-`g` surface: `a_i ∪ b_i = ω`, all other products of degree-1 classes vanish.
pub fn surface(g: u32) -> CohomologyRing {
    let mut b = Builder::new();
    let pairs: Vec<(usize, usize)> = (1..=g)
        .map(|i| (b.element(format!("a{i}"), 1), b.element(format!("b{i}"), 1)))
        .collect();
    let top = b.element("w", 2);
    for (x, y) in pairs {
        b.product(x, y, top, 1);
    }
    b.finish(2, true)
}

/// A point (`n = 0`), or an acyclic open manifold of dimension `n`.
pub fn point(n: u32) -> CohomologyRing {
    Builder::new().finish(n, n == 0)
}

/// Homology projective plane of dimension `4m`: `x² = y`.
pub fn rational_projective_plane(m: u32) -> CohomologyRing {
    let mut b = Builder::new();
    let x = b.element("x", 2 * m);
    let y = b.element("y", 4 * m);
    b.product(x, x, y, 1);
    b.finish(4 * m, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly2;
    use crate::ring::{emit_ring, parse_ring};

    fn all_presets() -> Vec<CohomologyRing> {
        let mut v = vec![product_p1_p1(), point(0), point(3)];
        for n in 1..=4 {
            v.push(sphere(n));
            v.push(complex_projective(n));
            v.push(torus(n));
            v.push(surface(n - 1));
            v.push(rational_projective_plane(n));
        }
        v
    }

    #[test]
    fn presets_validate() {
        for r in all_presets() {
            assert!(r.validate().is_valid(), "{}", r.validate());
        }
    }

    #[test]
    fn closed_presets_satisfy_duality_of_betti_numbers() {
        for r in all_presets().into_iter().filter(|r| r.is_closed()) {
            let b = r.betti();
            let rev: Vec<u64> = b.iter().rev().copied().collect();
            assert_eq!(b, rev);
        }
    }

    #[test]
    fn round_trip_through_file_format() {
        for r in all_presets() {
            assert_eq!(parse_ring(&emit_ring(&r)).unwrap(), r);
        }
    }

    #[test]
    fn euler_characteristics() {
        assert_eq!(sphere(4).euler_char(), 2);
        assert_eq!(complex_projective(3).euler_char(), 4);
        assert_eq!(torus(2).euler_char(), 0);
        // 2 - 4 + 1 summed by hand for genus 2
        assert_eq!(surface(2).euler_char(), -2);
    }

    #[test]
    fn poincare_polynomials() {
        assert_eq!(
            rational_projective_plane(1).poincare(),
            Poly2::from_t_coeffs(&[1, 0, 1, 0, 1])
        );
        assert_eq!(product_p1_p1().poincare(), Poly2::from_t_coeffs(&[1, 0, 2, 0, 1]));
        let s1 = preset("sphere", &[1]).unwrap();
        assert_eq!(s1.poincare(), Poly2::from_t_coeffs(&[1, 1]));
        assert_eq!(s1.dim(), 1);
        assert_eq!(torus(3).poincare(), Poly2::from_t_coeffs(&[1, 3, 3, 1]));
    }

    #[test]
    fn lookup_errors() {
        assert!(matches!(preset("klein", &[]), Err(Error::UnknownPreset(_))));
        assert!(matches!(preset("surface", &[-1]), Err(Error::PresetParameter { .. })));
        assert!(matches!(preset("sphere", &[]), Err(Error::PresetParameter { .. })));
        assert!(preset("cpn", &[3]).is_ok());
        assert!(preset("p1p1", &[]).is_ok());
    }
}
