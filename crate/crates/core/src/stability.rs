//! Stability analysis of a finite sequence `P_{C_1(M)}, …, P_{C_H(M)}`.
//!
//! Every detection is certified only up to the horizon `H`. A witness must
//! be confirmed on at least [`MIN_CERTIFIED_STEPS`] consecutive transitions
//! `k → k + 1`, so a single coincidence at the end of the sequence is never
//! reported as stability. Ties are broken by smallest range, then smallest
//! shift.

use std::collections::BTreeMap;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::json;

use crate::cohomology::{euler_char, truncate, BettiTable2, Engine};
use crate::error::{Error, Result};
use crate::model::odd_symmetric_power;
use crate::poly::Poly2;
use crate::ring::CohomologyRing;

/// Number of consecutive transitions a detection must hold on.
pub const MIN_CERTIFIED_STEPS: usize = 2;

/// `P_{C_k(M)}` for `k = 1..=horizon`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolySequence {
    entries: Vec<Poly2>,
}

impl PolySequence {
    pub fn new(entries: Vec<Poly2>) -> Result<Self> {
        if entries.len() < 3 {
            return Err(Error::Unsupported(format!(
                "a stability analysis needs horizon >= 3, got {}",
                entries.len()
            )));
        }
        Ok(Self { entries })
    }

    /// From tables that must cover `k = 1..=H` contiguously.
    pub fn from_tables(tables: &[BettiTable2]) -> Result<Self> {
        let mut sorted: Vec<&BettiTable2> = tables.iter().collect();
        sorted.sort_by_key(|t| t.k());
        for (n, t) in sorted.iter().enumerate() {
            if t.k() != n + 1 {
                return Err(Error::Unsupported(format!(
                    "sequence must be contiguous from k = 1; missing k = {}",
                    n + 1
                )));
            }
        }
        Self::new(sorted.into_iter().map(BettiTable2::poincare).collect())
    }

    pub fn compute(engine: &Engine, horizon: usize) -> Result<Self> {
        Self::from_tables(&engine.tables(1, horizon)?)
    }

    pub fn horizon(&self) -> usize {
        self.entries.len()
    }

    /// `P_k`, `1 <= k <= horizon`.
    pub fn get(&self, k: usize) -> &Poly2 {
        &self.entries[k - 1]
    }

    /// The first `h` entries.
    pub fn prefix(&self, h: usize) -> Result<Self> {
        Self::new(self.entries[..h.min(self.entries.len())].to_vec())
    }

    pub fn cd(&self, k: usize) -> Option<u32> {
        self.get(k).top_t_degree()
    }

    fn difference(&self, k: usize) -> Poly2 {
        self.get(k + 1) - self.get(k)
    }

    /// Candidate ranges `1..=H - MIN_CERTIFIED_STEPS`.
    fn ranges(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.horizon().saturating_sub(MIN_CERTIFIED_STEPS)
    }

    /// Shift forced by the top degrees of `P_r` and `P_{r+1}`.
    fn top_shift(&self, r: usize) -> Option<u32> {
        let (a, b) = (self.cd(r)?, self.cd(r + 1)?);
        (b > a).then(|| b - a)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShiftedStability {
    pub r: usize,
    pub sigma: u32,
    pub q: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoincareShifted {
    pub r: usize,
    pub sigma: u32,
    /// `R(t, s)` with `P_{k+1} = P_k + t^{(k+1-r)σ} R` for `k >= r`.
    pub ratio: Poly2,
}

impl PoincareShifted {
    /// The difference `P_{k+1} - P_k` predicted by the recurrence.
    pub fn difference_at(&self, k: usize) -> Poly2 {
        self.ratio.shift_t((k + 1 - self.r) as u32 * self.sigma)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtendedShifted {
    pub r: usize,
    pub sigma: u32,
}

/// Smallest `r` with `P_k = P_r` for all `r <= k <= H`.
pub fn detect_strong(seq: &PolySequence) -> Option<usize> {
    let h = seq.horizon();
    seq.ranges().find(|&r| (r + 1..=h).all(|k| seq.get(k) == seq.get(r)))
}

/// Smallest `(r, σ)` with `P^{[q]}_{k+1} = t^σ P^{[q]}_k` for `r <= k < H`,
/// comparing two-variable polynomials.
pub fn detect_shifted(seq: &PolySequence, q: u32) -> Option<ShiftedStability> {
    if q == 0 {
        return None;
    }
    let h = seq.horizon();
    seq.ranges().find_map(|r| {
        let sigma = seq.top_shift(r)?;
        (r..h)
            .all(|k| shifted_window_holds(seq, k, q, sigma))
            .then_some(ShiftedStability { r, sigma, q })
    })
}

fn shifted_window_holds(seq: &PolySequence, k: usize, q: u32, sigma: u32) -> bool {
    match (truncate(seq.get(k), q), truncate(seq.get(k + 1), q)) {
        (Ok(lo), Ok(hi)) => hi == lo.shift_t(sigma),
        _ => false,
    }
}

/// Smallest `(r, σ)` and non-zero `R` with
/// `P_{k+1} = P_k + t^{(k+1-r)σ} R` for all `r <= k < H`.
pub fn detect_poincare_shifted(seq: &PolySequence) -> Option<PoincareShifted> {
    let h = seq.horizon();
    seq.ranges().find_map(|r| {
        let first = seq.difference(r);
        let second = seq.difference(r + 1);
        if first.is_zero() || second.is_zero() {
            return None;
        }
        let sigma = second.min_t_degree()?.checked_sub(first.min_t_degree()?)?;
        if sigma == 0 {
            return None;
        }
        let found = PoincareShifted {
            r,
            sigma,
            ratio: first.unshift_t(sigma)?,
        };
        (r..h)
            .all(|k| seq.difference(k) == found.difference_at(k))
            .then_some(found)
    })
}

/// Smallest `(r, σ)` with `P^{[(k-r+1)σ]}_{k+1} = t^σ P^{[(k-r+1)σ]}_k` for
/// all `r <= k < H`.
pub fn detect_extended_shifted(seq: &PolySequence) -> Option<ExtendedShifted> {
    let h = seq.horizon();
    seq.ranges().find_map(|r| {
        let sigma = seq.top_shift(r)?;
        (r..h)
            .all(|k| shifted_window_holds(seq, k, (k - r + 1) as u32 * sigma, sigma))
            .then_some(ExtendedShifted { r, sigma })
    })
}

/// Largest length `q` with a shifted-stability witness, and that witness.
pub fn detect_longest_shifted(seq: &PolySequence) -> Option<ShiftedStability> {
    let max_q = (1..=seq.horizon()).filter_map(|k| seq.cd(k)).max()? + 1;
    let mut best = None;
    for q in 1..=max_q {
        match detect_shifted(seq, q) {
            Some(found) => best = Some(found),
            None => break,
        }
    }
    best
}

/// Cohomological dimensions and their linear growth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CdSequence {
    pub values: BTreeMap<usize, u32>,
    /// `(r, σ)` of shifted stability (length 1), when detected.
    pub shifted: Option<(usize, u32)>,
    /// Whether `cd(k) = cd(r) + (k - r)σ` for `r <= k <= H`.
    pub linear: Option<bool>,
}

pub fn cd_sequence(seq: &PolySequence) -> CdSequence {
    let values: BTreeMap<usize, u32> = (1..=seq.horizon()).filter_map(|k| seq.cd(k).map(|c| (k, c))).collect();
    let shifted = detect_shifted(seq, 1).map(|s| (s.r, s.sigma));
    let linear = shifted.map(|(r, sigma)| {
        let base = values.get(&r).copied();
        (r..=seq.horizon()).all(|k| base.map(|b| b + (k - r) as u32 * sigma) == values.get(&k).copied())
    });
    CdSequence {
        values,
        shifted,
        linear,
    }
}

/// Everything the detectors found, certified for `k <= certified_up_to`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityReport {
    pub strong: Option<usize>,
    pub shifted: Option<ShiftedStability>,
    pub poincare_shifted: Option<PoincareShifted>,
    pub extended_shifted: Option<ExtendedShifted>,
    pub cd: BTreeMap<usize, u32>,
    pub certified_up_to: usize,
}

pub fn analyze(seq: &PolySequence) -> StabilityReport {
    StabilityReport {
        strong: detect_strong(seq),
        shifted: detect_longest_shifted(seq),
        poincare_shifted: detect_poincare_shifted(seq),
        extended_shifted: detect_extended_shifted(seq),
        cd: cd_sequence(seq).values,
        certified_up_to: seq.horizon(),
    }
}

impl Serialize for StabilityReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(6))?;
        map.serialize_entry("strong", &self.strong)?;
        map.serialize_entry("shifted", &self.shifted)?;
        map.serialize_entry(
            "poincare_shifted",
            &self
                .poincare_shifted
                .as_ref()
                .map(|p| json!({ "r": p.r, "sigma": p.sigma, "R": p.ratio.to_string() })),
        )?;
        map.serialize_entry("extended_shifted", &self.extended_shifted)?;
        let cd: Vec<_> = self.cd.iter().map(|(k, c)| json!({ "k": k, "cd": c })).collect();
        map.serialize_entry("cd", &cd)?;
        map.serialize_entry("certified_up_to", &self.certified_up_to)?;
        map.end()
    }
}

/// Poincaré-shifted ⇒ extended-shifted ⇒ shifted (for some length).
pub fn verify_implication_chain(report: &StabilityReport) -> bool {
    let first = report.poincare_shifted.is_none() || report.extended_shifted.is_some();
    let second = report.extended_shifted.is_none() || report.shifted.is_some();
    first && second
}

/// Coefficients of `(1+t)^χ` up to `t^n`.
pub fn binomial_series(chi: i64, n: usize) -> Vec<i128> {
    let mut out = Vec::with_capacity(n + 1);
    let mut c: i128 = 1;
    out.push(c);
    for k in 1..=n as i128 {
        c = c * (chi as i128 - k + 1) / k;
        out.push(c);
    }
    out
}

/// `1 + Σ_{k<=H} χ(C_k) t^k ≡ (1+t)^{χ(M)} mod t^{H+1}`.
pub fn euler_identity_check(ring: &CohomologyRing, seq: &PolySequence) -> bool {
    let expected = binomial_series(ring.euler_char(), seq.horizon());
    (1..=seq.horizon()).all(|k| euler_char(seq.get(k)) as i128 == expected[k])
}

/// `h <= σ` for the Poincaré-shifted witness; `None` when there is none.
pub fn connectivity_shift_inequality(ring: &CohomologyRing, report: &StabilityReport) -> Option<bool> {
    report.poincare_shifted.as_ref().map(|p| ring.connectivity() <= p.sigma)
}

/// A manifold with `χ(M) <= -2` must not show Poincaré-polynomial shifted stability.
pub fn euler_obstruction_check(ring: &CohomologyRing, report: &StabilityReport) -> bool {
    !(ring.euler_char() <= -2 && report.poincare_shifted.is_some())
}

/// Outcome of checking the degree-splitting recurrence on every eligible `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrenceCheck {
    pub checked: Vec<usize>,
    pub failed: Vec<usize>,
}

impl RecurrenceCheck {
    pub fn holds(&self) -> bool {
        self.failed.is_empty()
    }
}

/// With extended shifted stability `(r, σ)` and `(h-1)`-connectivity: for
/// each `k >= r` with `max(r, cd(r)) <= hk + h - 2`, `P_{k+1}` agrees with
/// `P_k` in degrees `<= cd(r)`, and above `cd(r)` it is the part of `P_k` in
/// degrees `>= cd(r) - σ + 1` shifted up by `σ`. `None` when the sequence has
/// no extended shifted stability.
pub fn stability_recurrence_check(seq: &PolySequence, report: &StabilityReport, h: u32) -> Option<RecurrenceCheck> {
    let ext = report.extended_shifted.as_ref()?;
    let (r, sigma) = (ext.r, ext.sigma);
    let cd_r = seq.cd(r)?;
    let mut out = RecurrenceCheck {
        checked: Vec::new(),
        failed: Vec::new(),
    };
    for k in r..seq.horizon() {
        let bound = h as usize * k + h as usize - 2;
        if (r.max(cd_r as usize)) > bound {
            continue;
        }
        let (pk, pk1) = (seq.get(k), seq.get(k + 1));
        let low_ok = pk1.t_window(0, cd_r) == pk.t_window(0, cd_r);
        let from = (cd_r + 1).saturating_sub(sigma);
        let high_ok = pk1.t_window(cd_r + 1, u32::MAX) == pk.t_window(from, u32::MAX).shift_t(sigma);
        out.checked.push(k);
        if !(low_ok && high_ok) {
            out.failed.push(k);
        }
    }
    Some(out)
}

/// Result of checking the odd-dimensional shifted-stability criterion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OddCriterion {
    /// Top positive even degree with non-zero Betti number, and that number.
    pub top_even: Option<(u32, u64)>,
    pub shifted: Option<ShiftedStability>,
    pub strong: Option<usize>,
    /// Whether the computed sequence behaves as predicted.
    pub consistent: bool,
}

/// For odd-dimensional `M`: shifted stability within the horizon exactly when
/// the top positive even Betti number is one; with odd cohomology, strong
/// stability with range `β(M) - 1` (or 1 when `M` is rationally acyclic).
pub fn odd_shifted_criterion(ring: &CohomologyRing, horizon: usize) -> Result<OddCriterion> {
    if ring.dim() % 2 == 0 {
        return Err(Error::Unsupported(
            "odd-dimensional criterion needs odd dimension".into(),
        ));
    }
    let tables = (1..=horizon)
        .map(|k| odd_symmetric_power(ring, k))
        .collect::<Result<Vec<_>>>()?;
    let seq = PolySequence::from_tables(&tables)?;
    let betti = ring.betti();
    let top_even = (1..betti.len())
        .rev()
        .find(|&d| d % 2 == 0 && betti[d] > 0)
        .map(|d| (d as u32, betti[d]));
    let shifted = detect_shifted(&seq, 1);
    let strong = detect_strong(&seq);
    let consistent = match top_even {
        Some((_, b)) => shifted.is_some() == (b == 1) && strong.is_none(),
        None => {
            let expected = if ring.total_betti() == 1 {
                1
            } else {
                ring.total_betti() - 1
            };
            strong == Some(expected) && shifted.is_none()
        }
    };
    Ok(OddCriterion {
        top_even,
        shifted,
        strong,
        consistent,
    })
}

/// Which stable range a bigraded Betti number was checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StableRange {
    /// `i <= k` for `j = 0`, `i <= k + (2m-2)j - 1` for `j >= 1`.
    Classical,
    /// `i <= h(k+1) - 1` for `j = 0`, `i <= hk + (2m-h-1)j - 1` for `j >= 1`.
    Connected,
    /// Total Betti number in degrees `i <= hk + h - 2`.
    Total,
}

impl StableRange {
    /// Largest degree covered at `(k, j)`, or `None` when the range is empty.
    pub fn bound(self, k: usize, j: u32, two_m: u32, h: u32) -> Option<u32> {
        let (k, j, two_m, h) = (k as i64, j as i64, two_m as i64, h as i64);
        let b = match (self, j) {
            (StableRange::Classical, 0) => k,
            (StableRange::Classical, _) => k + (two_m - 2) * j - 1,
            (StableRange::Connected, 0) => h * (k + 1) - 1,
            (StableRange::Connected, _) => h * k + (two_m - h - 1) * j - 1,
            (StableRange::Total, _) => h * k + h - 2,
        };
        u32::try_from(b).ok()
    }
}

/// Ranges that apply to a closed oriented even-dimensional ring. The
/// connectivity-based ranges need `h <= m`, which fails only for homology
/// spheres.
pub fn applicable_ranges(ring: &CohomologyRing) -> Vec<StableRange> {
    if ring.dim() == 0 || ring.dim() % 2 == 1 || !ring.is_closed() || !ring.is_oriented() {
        return Vec::new();
    }
    if ring.connectivity() <= ring.dim() / 2 {
        vec![StableRange::Classical, StableRange::Connected, StableRange::Total]
    } else {
        vec![StableRange::Classical]
    }
}

/// A Betti number that changed from `C_k` to `C_{k+1}` inside a stable range.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RangeViolation {
    pub range: StableRange,
    pub k: usize,
    pub i: u32,
    /// `None` for total Betti numbers.
    pub j: Option<u32>,
    pub before: u64,
    pub after: u64,
}

/// Check that `β_{i,j}(C_k) = β_{i,j}(C_{k+1})` inside `range` for every
/// consecutive pair of tables. `two_m` is the manifold dimension and `h` its
/// connectivity.
pub fn stable_range_violations(tables: &[BettiTable2], range: StableRange, two_m: u32, h: u32) -> Vec<RangeViolation> {
    let by_k: BTreeMap<usize, &BettiTable2> = tables.iter().map(|t| (t.k(), t)).collect();
    let mut out = Vec::new();
    for (&k, lo) in &by_k {
        let Some(hi) = by_k.get(&(k + 1)) else { continue };
        let top = lo.entries().chain(hi.entries()).map(|((i, _), _)| i).max().unwrap_or(0);
        if range == StableRange::Total {
            let Some(bound) = range.bound(k, 0, two_m, h) else {
                continue;
            };
            for i in 0..=bound.min(top) {
                let (before, after) = (lo.total(i), hi.total(i));
                if before != after {
                    out.push(RangeViolation {
                        range,
                        k,
                        i,
                        j: None,
                        before,
                        after,
                    });
                }
            }
            continue;
        }
        let max_j = lo.entries().chain(hi.entries()).map(|((_, j), _)| j).max().unwrap_or(0);
        for j in 0..=max_j {
            let Some(bound) = range.bound(k, j, two_m, h) else {
                continue;
            };
            for i in 0..=bound.min(top) {
                let (before, after) = (lo.get(i, j), hi.get(i, j));
                if before != after {
                    out.push(RangeViolation {
                        range,
                        k,
                        i,
                        j: Some(j),
                        before,
                        after,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(polys: &[&[i64]]) -> PolySequence {
        PolySequence::new(polys.iter().map(|c| Poly2::from_t_coeffs(c)).collect()).unwrap()
    }

    #[test]
    fn strong_needs_two_steps() {
        let s = seq(&[&[1, 0, 1], &[1], &[1, 0, 0, 1], &[1, 0, 0, 1], &[1, 0, 0, 1]]);
        assert_eq!(detect_strong(&s), Some(3));
        assert_eq!(detect_strong(&s.prefix(4).unwrap()), None);
    }

    #[test]
    fn short_sequences_rejected() {
        assert!(PolySequence::new(vec![Poly2::one(), Poly2::one()]).is_err());
    }

    #[test]
    fn poincare_shift_on_arithmetic_sequence() {
        // P_k = 1 + t^2 + ... + t^{2k}: P_{k+1} - P_k = t^{2k+2} = t^{2(k+1-1)} · t^2
        let polys: Vec<Poly2> = (1..=6)
            .map(|k| Poly2::from_terms((0..=k).map(|i| ((2 * i as u32, 0), 1))))
            .collect();
        let s = PolySequence::new(polys).unwrap();
        let found = detect_poincare_shifted(&s).unwrap();
        assert_eq!((found.r, found.sigma), (1, 2));
        assert_eq!(found.ratio, Poly2::monomial(2, 0, 1));
        assert_eq!(detect_shifted(&s, 1).map(|x| (x.r, x.sigma)), Some((1, 2)));
        assert_eq!(detect_extended_shifted(&s), Some(ExtendedShifted { r: 1, sigma: 2 }));
        let cd = cd_sequence(&s);
        assert_eq!(cd.linear, Some(true));
    }

    #[test]
    fn binomial_series_negative_exponent() {
        assert_eq!(binomial_series(-2, 4), vec![1, -2, 3, -4, 5]);
        assert_eq!(binomial_series(2, 4), vec![1, 2, 1, 0, 0]);
        assert_eq!(binomial_series(0, 2), vec![1, 0, 0]);
    }

    #[test]
    fn chain_on_empty_report_is_vacuous() {
        let report = StabilityReport {
            strong: Some(3),
            shifted: None,
            poincare_shifted: None,
            extended_shifted: None,
            cd: BTreeMap::new(),
            certified_up_to: 6,
        };
        assert!(verify_implication_chain(&report));
        let broken = StabilityReport {
            extended_shifted: Some(ExtendedShifted { r: 2, sigma: 1 }),
            ..report
        };
        assert!(!verify_implication_chain(&broken));
    }

    #[test]
    fn report_json_shape() {
        let report = StabilityReport {
            strong: None,
            shifted: Some(ShiftedStability { r: 8, sigma: 2, q: 5 }),
            poincare_shifted: Some(PoincareShifted {
                r: 5,
                sigma: 2,
                ratio: Poly2::monomial(2, 1, 3),
            }),
            extended_shifted: None,
            cd: [(1, 4)].into_iter().collect(),
            certified_up_to: 12,
        };
        let v: serde_json::Value = serde_json::to_value(&report).unwrap();
        assert_eq!(v["strong"], serde_json::Value::Null);
        assert_eq!(v["shifted"]["q"], 5);
        assert_eq!(v["poincare_shifted"]["R"], "3st^2");
        assert_eq!(v["cd"][0]["cd"], 4);
        assert_eq!(v["certified_up_to"], 12);
    }
}
