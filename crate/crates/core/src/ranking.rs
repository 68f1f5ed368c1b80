//! Rank refinement: combine normalized base suspiciousness with the coverage
//! ratio of purified failing tests, plus the wasted-effort metric and the
//! Positive/Negative/Neutral comparison used by the evaluation harness.

use crate::frontend::StatementId;
use crate::purification::PurifiedSpectra;
use crate::spectra::SuspiciousnessMap;
use std::collections::BTreeMap;

/// How normalized suspiciousness and the purified ratio are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineVariant {
    /// score = norm × (1 + ratio) / 2 (the default).
    Product,
    /// score = (norm + ratio) / 2.
    Average,
    /// score = 2·norm·ratio / (norm + ratio), 0 when both are 0.
    Geometric,
}

impl RefineVariant {
    pub fn name(self) -> &'static str {
        match self {
            RefineVariant::Product => "product",
            RefineVariant::Average => "average",
            RefineVariant::Geometric => "geometric",
        }
    }

    pub fn from_name(name: &str) -> Option<RefineVariant> {
        match name {
            "product" => Some(RefineVariant::Product),
            "average" => Some(RefineVariant::Average),
            "geometric" => Some(RefineVariant::Geometric),
            _ => None,
        }
    }

    pub fn combine(self, norm: f64, ratio: f64) -> f64 {
        match self {
            RefineVariant::Product => norm * (1.0 + ratio) / 2.0,
            RefineVariant::Average => (norm + ratio) / 2.0,
            RefineVariant::Geometric => {
                if norm + ratio == 0.0 {
                    0.0
                } else {
                    2.0 * norm * ratio / (norm + ratio)
                }
            }
        }
    }
}

impl Default for RefineVariant {
    fn default() -> Self {
        RefineVariant::Product
    }
}

/// Per-statement refinement inputs and final score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refined {
    pub susp: f64,
    pub norm: f64,
    pub ratio: f64,
    pub score: f64,
}

pub type RefinedScores = BTreeMap<StatementId, Refined>;

/// ratio(s) = beta_ef / (beta_ef + beta_nf); 0 when no purified row covers
/// the statement (including the empty-spectra degenerate case).
pub fn ratio(stmt: StatementId, purified: &PurifiedSpectra) -> f64 {
    let (ef, nf) = purified.beta(stmt);
    if ef == 0 {
        0.0
    } else {
        ef as f64 / (ef + nf) as f64
    }
}

/// Affine rescale of suspiciousness to [0, 1]. When every value is equal the
/// formula degenerates, and every statement gets norm 1 so the ratio alone
/// discriminates.
pub fn normalize(susp_map: &SuspiciousnessMap) -> BTreeMap<StatementId, f64> {
    let min = susp_map.values().cloned().fold(f64::INFINITY, f64::min);
    let max = susp_map.values().cloned().fold(f64::NEG_INFINITY, f64::max);
    susp_map
        .iter()
        .map(|(&s, &v)| {
            let norm = if max == min { 1.0 } else { (v - min) / (max - min) };
            (s, norm)
        })
        .collect()
}

/// Combines base suspiciousness with purified coverage into final scores.
pub fn refine(
    susp_map: &SuspiciousnessMap,
    purified: &PurifiedSpectra,
    variant: RefineVariant,
) -> RefinedScores {
    let norms = normalize(susp_map);
    susp_map
        .iter()
        .map(|(&s, &susp)| {
            let norm = norms[&s];
            let r = ratio(s, purified);
            (s, Refined { susp, norm, ratio: r, score: variant.combine(norm, r) })
        })
        .collect()
}

/// Wasted effort: statements ranked strictly above the faulty one, plus half
/// of the tied group (which includes the faulty statement itself), plus 1/2.
/// Equals the expected 1-based rank of the faulty statement under uniformly
/// random tie-breaking. Returns None when `faulty` has no score.
pub fn stmt_effort(scores: &BTreeMap<StatementId, f64>, faulty: StatementId) -> Option<f64> {
    let target = *scores.get(&faulty)?;
    let above = scores.values().filter(|&&v| v > target).count() as f64;
    let tied = scores.values().filter(|&&v| v == target).count() as f64;
    Some(above + 0.5 * tied + 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonOutcome {
    Positive,
    Negative,
    Neutral,
}

impl ComparisonOutcome {
    pub fn name(self) -> &'static str {
        match self {
            ComparisonOutcome::Positive => "positive",
            ComparisonOutcome::Negative => "negative",
            ComparisonOutcome::Neutral => "neutral",
        }
    }
}

/// Effect of refinement on wasted effort for one fault: saved effort and its
/// sign classification.
pub fn compare(effort_original: f64, effort_refined: f64) -> (ComparisonOutcome, f64) {
    let save = effort_original - effort_refined;
    let outcome = if save > 0.0 {
        ComparisonOutcome::Positive
    } else if save < 0.0 {
        ComparisonOutcome::Negative
    } else {
        ComparisonOutcome::Neutral
    };
    (outcome, save)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::purification::{PurifiedRow, PurifiedSpectra};

    fn sid(n: u32) -> StatementId {
        StatementId(n)
    }

    fn spectra(stmts: &[u32], rows: &[&[bool]]) -> PurifiedSpectra {
        PurifiedSpectra {
            statements: stmts.iter().map(|&n| sid(n)).collect(),
            rows: rows
                .iter()
                .enumerate()
                .map(|(i, r)| PurifiedRow {
                    origin: format!("t{i}"),
                    kept_assertion: None,
                    covered: r.to_vec(),
                })
                .collect(),
        }
    }

    #[test]
    fn ratio_basic_and_degenerate() {
        let p = spectra(&[0, 1, 2], &[&[true, true, false], &[true, false, false]]);
        assert_eq!(ratio(sid(0), &p), 1.0);
        assert_eq!(ratio(sid(1), &p), 0.5);
        assert_eq!(ratio(sid(2), &p), 0.0);
        let empty = PurifiedSpectra::empty(vec![sid(0)]);
        assert_eq!(ratio(sid(0), &empty), 0.0);
    }

    #[test]
    fn normalize_rescales_and_handles_ties() {
        let m: SuspiciousnessMap =
            [(sid(0), 0.2), (sid(1), 0.6), (sid(2), 1.0)].into_iter().collect();
        let n = normalize(&m);
        assert!((n[&sid(0)] - 0.0).abs() < 1e-15);
        assert!((n[&sid(1)] - 0.5).abs() < 1e-15);
        assert!((n[&sid(2)] - 1.0).abs() < 1e-15);

        let flat: SuspiciousnessMap = [(sid(0), 0.7), (sid(1), 0.7)].into_iter().collect();
        assert!(normalize(&flat).values().all(|&v| v == 1.0));
    }

    #[test]
    fn refine_product_arithmetic() {
        // norm 0.8 with ratio 0.5 gives 0.8 * 0.75 = 0.6.
        assert!((RefineVariant::Product.combine(0.8, 0.5) - 0.6).abs() < 1e-15);
        assert_eq!(RefineVariant::Product.combine(1.0, 1.0), 1.0);
        assert_eq!(RefineVariant::Product.combine(0.0, 0.9), 0.0);
    }

    #[test]
    fn refine_variants_agree_on_extremes() {
        for v in [RefineVariant::Product, RefineVariant::Average, RefineVariant::Geometric] {
            assert_eq!(v.combine(1.0, 1.0), 1.0, "{}", v.name());
            assert_eq!(v.combine(0.0, 0.0), 0.0, "{}", v.name());
            let s = v.combine(0.3, 0.9);
            assert!((0.0..=1.0).contains(&s), "{} out of range: {s}", v.name());
        }
    }

    #[test]
    fn refine_end_to_end_ranges() {
        let m: SuspiciousnessMap =
            [(sid(0), 1.0), (sid(1), 1.0), (sid(2), 0.5)].into_iter().collect();
        let p = spectra(&[0, 1, 2], &[&[true, false, false]]);
        let r = refine(&m, &p, RefineVariant::Product);
        for v in r.values() {
            assert!((0.0..=1.0).contains(&v.norm));
            assert!((0.0..=1.0).contains(&v.ratio));
            assert!((0.0..=1.0).contains(&v.score));
        }
        // equal base susp, but only s0 covered by the purified row.
        assert!(r[&sid(0)].score > r[&sid(1)].score);
    }

    #[test]
    fn effort_formula_cases() {
        // unique maximum.
        let m: BTreeMap<StatementId, f64> =
            [(sid(0), 0.9), (sid(1), 0.1)].into_iter().collect();
        assert_eq!(stmt_effort(&m, sid(0)), Some(1.0));
        assert_eq!(stmt_effort(&m, sid(1)), Some(2.0));

        // 11-way tie.
        let tie: BTreeMap<StatementId, f64> = (0..11).map(|i| (sid(i), 1.0)).collect();
        assert_eq!(stmt_effort(&tie, sid(4)), Some(6.0));

        // 2-way tie at the top.
        let two: BTreeMap<StatementId, f64> =
            [(sid(0), 1.0), (sid(1), 1.0), (sid(2), 0.2)].into_iter().collect();
        assert_eq!(stmt_effort(&two, sid(0)), Some(1.5));

        assert_eq!(stmt_effort(&two, sid(9)), None);
    }

    #[test]
    fn compare_signs() {
        assert_eq!(compare(6.0, 1.5), (ComparisonOutcome::Positive, 4.5));
        assert_eq!(compare(1.0, 1.0), (ComparisonOutcome::Neutral, 0.0));
        assert_eq!(compare(3.0, 7.0), (ComparisonOutcome::Negative, -4.0));
    }

    #[test]
    fn constant_ratio_preserves_argmax() {
        let m: SuspiciousnessMap =
            [(sid(0), 0.3), (sid(1), 0.9), (sid(2), 0.9), (sid(3), 0.1)]
                .into_iter()
                .collect();
        // every statement covered by the single purified row → ratio ≡ 1.
        let p = spectra(&[0, 1, 2, 3], &[&[true, true, true, true]]);
        let r = refine(&m, &p, RefineVariant::Product);
        let max_score = r.values().map(|v| v.score).fold(f64::NEG_INFINITY, f64::max);
        let argmax: Vec<_> =
            r.iter().filter(|(_, v)| v.score == max_score).map(|(&s, _)| s).collect();
        assert_eq!(argmax, vec![sid(1), sid(2)]);
    }
}
