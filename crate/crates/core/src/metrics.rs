//! Model characteristics from labeled evaluation scores: ROC and
//! precision-recall curves, AUC, threshold selection and the confusion
//! matrix at the chosen threshold.
//!
//! Classification rule everywhere: `score >= threshold` predicts positive.

use std::cmp::Ordering;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EvalRecord<T> {
    pub score: T,
    /// `true` when a person is present.
    pub label: bool,
}

impl<T: Scalar> EvalRecord<T> {
    pub fn new(score: T, label: bool) -> Result<Self> {
        if !(score >= T::zero() && score <= T::one()) {
            return Err(Error::OutOfRange { what: "score", value: score.to_string(), range: "[0, 1]" });
        }
        Ok(EvalRecord { score, label })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RocPoint<T> {
    pub fpr: T,
    pub tpr: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RocCurve<T> {
    pub points: Vec<RocPoint<T>>,
    pub auc: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PrPoint<T> {
    pub recall: T,
    pub precision: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PrCurve<T> {
    pub points: Vec<PrPoint<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ConfusionMatrix<T> {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub threshold: T,
}

fn ratio<T: Scalar>(num: usize, den: usize) -> T {
    if den == 0 {
        T::one()
    } else {
        T::from_count(num) / T::from_count(den)
    }
}

impl<T: Scalar> ConfusionMatrix<T> {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// (tp + tn) / N; 1 for an empty set.
    pub fn accuracy(&self) -> T {
        ratio(self.tp + self.tn, self.total())
    }

    /// tp / (tp + fp); 1 when nothing is predicted positive.
    pub fn precision(&self) -> T {
        ratio(self.tp, self.tp + self.fp)
    }

    /// tp / (tp + fn); 1 when there are no positives to find.
    pub fn recall(&self) -> T {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// Harmonic mean of precision and recall; 0 when both are 0.
    pub fn f1(&self) -> T {
        let p = self.precision();
        let r = self.recall();
        if p + r == T::zero() {
            T::zero()
        } else {
            (p + p) * r / (p + r)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelMeta {
    pub architecture: String,
    pub parameter_count: u64,
    pub input_shape: String,
    pub output_schema: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ModelReport<T> {
    pub roc: RocCurve<T>,
    pub pr: PrCurve<T>,
    pub chosen_threshold: T,
    pub confusion: ConfusionMatrix<T>,
    pub accuracy: T,
    pub precision: T,
    pub recall: T,
    pub f1: T,
    pub model_meta: ModelMeta,
}

/// Cumulative (tp, fp) after admitting each group of tied scores, walking
/// from the highest score down.
struct Sweep {
    cumulative: Vec<(usize, usize)>,
    positives: usize,
    negatives: usize,
}

fn descending<T: Scalar>(records: &[EvalRecord<T>]) -> Vec<EvalRecord<T>> {
    let mut sorted = records.to_vec();
    sorted.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal));
    sorted
}

fn sweep<T: Scalar>(records: &[EvalRecord<T>]) -> Sweep {
    let sorted = descending(records);
    let mut cumulative = Vec::new();
    let (mut tp, mut fp) = (0, 0);
    for (i, r) in sorted.iter().enumerate() {
        if r.label {
            tp += 1;
        } else {
            fp += 1;
        }
        let group_ends = sorted.get(i + 1).is_none_or(|next| next.score != r.score);
        if group_ends {
            cumulative.push((tp, fp));
        }
    }
    Sweep { cumulative, positives: tp, negatives: fp }
}

fn class_counts<T>(records: &[EvalRecord<T>]) -> (usize, usize) {
    let positives = records.iter().filter(|r| r.label).count();
    (positives, records.len() - positives)
}

fn require_both_classes<T>(records: &[EvalRecord<T>]) -> Result<()> {
    let (positives, negatives) = class_counts(records);
    if positives == 0 || negatives == 0 {
        return Err(Error::DegenerateClasses { positives, negatives });
    }
    Ok(())
}

/// Trapezoidal area under a polyline given as (x, y) pairs.
pub fn trapezoid_area<T: Scalar>(points: impl IntoIterator<Item = (T, T)>) -> T {
    let two = T::lit(2.0);
    let mut area = T::zero();
    let mut prev: Option<(T, T)> = None;
    for (x, y) in points {
        if let Some((px, py)) = prev {
            area = area + (x - px) * (py + y) / two;
        }
        prev = Some((x, y));
    }
    area
}

pub fn roc_curve<T: Scalar>(records: &[EvalRecord<T>]) -> Result<RocCurve<T>> {
    require_both_classes(records)?;
    let s = sweep(records);
    let mut points = Vec::with_capacity(s.cumulative.len() + 1);
    points.push(RocPoint { fpr: T::zero(), tpr: T::zero() });
    points.extend(s.cumulative.iter().map(|&(tp, fp)| RocPoint {
        fpr: T::from_count(fp) / T::from_count(s.negatives),
        tpr: T::from_count(tp) / T::from_count(s.positives),
    }));
    let auc = trapezoid_area(points.iter().map(|p| (p.fpr, p.tpr)));
    Ok(RocCurve { points, auc })
}

pub fn pr_curve<T: Scalar>(records: &[EvalRecord<T>]) -> Result<PrCurve<T>> {
    let (positives, negatives) = class_counts(records);
    if positives == 0 {
        return Err(Error::DegenerateClasses { positives, negatives });
    }
    let s = sweep(records);
    let mut points = Vec::with_capacity(s.cumulative.len() + 1);
    points.push(PrPoint { recall: T::zero(), precision: T::one() });
    points.extend(s.cumulative.iter().map(|&(tp, fp)| PrPoint {
        recall: T::from_count(tp) / T::from_count(positives),
        precision: ratio(tp, tp + fp),
    }));
    Ok(PrCurve { points })
}

/// Candidate thresholds in ascending order: a sentinel at or below the
/// lowest score, midpoints between consecutive distinct scores, and a
/// sentinel strictly above the highest score.
pub fn candidate_thresholds<T: Scalar>(records: &[EvalRecord<T>]) -> Vec<T> {
    let mut scores: Vec<T> = records.iter().map(|r| r.score).collect();
    scores.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    scores.dedup();
    let (Some(&lowest), Some(&highest)) = (scores.first(), scores.last()) else {
        return Vec::new();
    };
    let two = T::lit(2.0);
    let mut candidates = Vec::with_capacity(scores.len() + 1);
    candidates.push(lowest / two);
    for pair in scores.windows(2) {
        let mid = (pair[0] + pair[1]) / two;
        // adjacent floats: the midpoint may round onto the lower score
        candidates.push(if mid > pair[0] { mid } else { pair[1] });
    }
    let above = if highest < T::one() {
        let mid = (highest + T::one()) / two;
        if mid > highest {
            mid
        } else {
            T::one()
        }
    } else {
        highest + highest * T::epsilon()
    };
    candidates.push(above);
    candidates
}

/// Threshold minimizing FP + FN (equal costs).
pub fn select_threshold<T: Scalar>(records: &[EvalRecord<T>]) -> Result<T> {
    select_threshold_weighted(records, T::one())
}

/// Threshold minimizing `fp_cost * FP + FN`; ties go to the smallest candidate.
pub fn select_threshold_weighted<T: Scalar>(records: &[EvalRecord<T>], fp_cost: T) -> Result<T> {
    require_both_classes(records)?;
    if !(fp_cost > T::zero() && fp_cost.is_finite()) {
        return Err(Error::OutOfRange { what: "false-positive cost", value: fp_cost.to_string(), range: "(0, inf)" });
    }
    let candidates = candidate_thresholds(records);

    // Ascending scores; candidate j admits as positive every distinct score
    // group with index >= j.
    let mut sorted = descending(records);
    sorted.reverse();
    let (positives, negatives) = class_counts(records);
    let (mut fn_, mut fp) = (0usize, negatives);
    let cost = |fp: usize, fn_: usize| fp_cost * T::from_count(fp) + T::from_count(fn_);

    let mut best = (cost(fp, fn_), 0usize);
    let mut j = 0;
    let mut i = 0;
    while i < sorted.len() {
        let score = sorted[i].score;
        while i < sorted.len() && sorted[i].score == score {
            if sorted[i].label {
                fn_ += 1;
            } else {
                fp -= 1;
            }
            i += 1;
        }
        j += 1;
        let c = cost(fp, fn_);
        if c < best.0 {
            best = (c, j);
        }
    }
    debug_assert_eq!(fn_, positives);
    Ok(candidates[best.1])
}

pub fn confusion_at<T: Scalar>(records: &[EvalRecord<T>], threshold: T) -> ConfusionMatrix<T> {
    let mut m = ConfusionMatrix { tp: 0, fp: 0, fn_: 0, tn: 0, threshold };
    for r in records {
        match (r.score >= threshold, r.label) {
            (true, true) => m.tp += 1,
            (true, false) => m.fp += 1,
            (false, true) => m.fn_ += 1,
            (false, false) => m.tn += 1,
        }
    }
    m
}

pub fn build_model_report<T: Scalar>(records: &[EvalRecord<T>], meta: ModelMeta) -> Result<ModelReport<T>> {
    build_model_report_weighted(records, meta, T::one())
}

pub fn build_model_report_weighted<T: Scalar>(
    records: &[EvalRecord<T>],
    meta: ModelMeta,
    fp_cost: T,
) -> Result<ModelReport<T>> {
    let roc = roc_curve(records)?;
    let pr = pr_curve(records)?;
    let chosen_threshold = select_threshold_weighted(records, fp_cost)?;
    let confusion = confusion_at(records, chosen_threshold);
    Ok(ModelReport {
        roc,
        pr,
        chosen_threshold,
        accuracy: confusion.accuracy(),
        precision: confusion.precision(),
        recall: confusion.recall(),
        f1: confusion.f1(),
        confusion,
        model_meta: meta,
    })
}

/// Reads evaluation records from CSV with header `score,label`, label in {0, 1}.
pub fn read_eval_csv<T: Scalar, R: Read>(reader: R, source: &str) -> Result<Vec<EvalRecord<T>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let csv_err = |line: u64, message: String| Error::Csv { path: source.to_string(), line, message };
    let headers = rdr.headers().map_err(|e| csv_err(1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["score", "label"] {
        return Err(csv_err(
            1,
            format!("expected header `score,label`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        let score: f64 = row[0].parse().map_err(|_| csv_err(line, format!("score `{}` is not a number", &row[0])))?;
        let label = match &row[1] {
            "1" => true,
            "0" => false,
            other => return Err(csv_err(line, format!("label `{other}` must be 0 or 1"))),
        };
        let record = EvalRecord::new(T::lit(score), label).map_err(|e| csv_err(line, e.to_string()))?;
        records.push(record);
    }
    Ok(records)
}

pub fn roc_csv<T: Scalar>(roc: &RocCurve<T>) -> String {
    let mut out = String::from("fpr,tpr\n");
    for p in &roc.points {
        out.push_str(&format!("{},{}\n", p.fpr, p.tpr));
    }
    out
}

pub fn pr_csv<T: Scalar>(pr: &PrCurve<T>) -> String {
    let mut out = String::from("recall,precision\n");
    for p in &pr.points {
        out.push_str(&format!("{},{}\n", p.recall, p.precision));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn recs(data: &[(f64, bool)]) -> Vec<EvalRecord<f64>> {
        data.iter().map(|&(s, l)| EvalRecord::new(s, l).unwrap()).collect()
    }

    /// Fraction of (positive, negative) pairs ranked correctly, ties 1/2.
    fn pairwise_auc(records: &[EvalRecord<f64>]) -> f64 {
        let pos: Vec<f64> = records.iter().filter(|r| r.label).map(|r| r.score).collect();
        let neg: Vec<f64> = records.iter().filter(|r| !r.label).map(|r| r.score).collect();
        let mut wins = 0.0;
        for p in &pos {
            for n in &neg {
                wins += if p > n {
                    1.0
                } else if p == n {
                    0.5
                } else {
                    0.0
                };
            }
        }
        wins / (pos.len() * neg.len()) as f64
    }

    fn meta() -> ModelMeta {
        ModelMeta {
            architecture: "MobileNetV1".into(),
            parameter_count: 1,
            input_shape: "96x96x1".into(),
            output_schema: "confidence byte".into(),
        }
    }

    #[test]
    fn separated_classes_give_unit_auc() {
        let r = recs(&[(0.9, true), (0.8, true), (0.3, false), (0.1, false)]);
        let roc = roc_curve(&r).unwrap();
        assert_eq!(roc.auc, 1.0);
        assert_eq!(roc.points.first(), Some(&RocPoint { fpr: 0.0, tpr: 0.0 }));
        assert_eq!(roc.points.last(), Some(&RocPoint { fpr: 1.0, tpr: 1.0 }));
    }

    #[test]
    fn three_of_four_pairs() {
        let r = recs(&[(0.9, true), (0.4, false), (0.35, true), (0.1, false)]);
        assert_eq!(pairwise_auc(&r), 0.75);
        assert!((roc_curve(&r).unwrap().auc - 0.75).abs() < 1e-12);
    }

    #[test]
    fn full_tie_is_half() {
        let r = recs(&[(0.5, true), (0.5, false)]);
        let roc = roc_curve(&r).unwrap();
        assert_eq!(roc.auc, 0.5);
        assert_eq!(roc.points.len(), 2);
    }

    #[test]
    fn one_class_is_degenerate() {
        let r = recs(&[(0.5, true), (0.7, true)]);
        assert!(matches!(roc_curve(&r), Err(Error::DegenerateClasses { positives: 2, negatives: 0 })));
        assert!(select_threshold(&r).is_err());
        assert!(build_model_report(&r, meta()).is_err());
        assert!(pr_curve(&recs(&[(0.5, false)])).is_err());
    }

    #[test]
    fn pr_curve_examples() {
        let r = recs(&[(0.9, true), (0.8, true), (0.3, false), (0.1, false)]);
        let pr = pr_curve(&r).unwrap();
        assert!(pr.points.contains(&PrPoint { recall: 1.0, precision: 1.0 }));

        let r = recs(&[(0.2, true), (0.8, false)]);
        let pr = pr_curve(&r).unwrap();
        let last = pr.points.last().unwrap();
        assert_eq!((last.recall, last.precision), (1.0, 0.5));

        let r = recs(&[(0.2, true), (0.6, true), (0.9, true)]);
        assert!(pr_curve(&r).unwrap().points.iter().all(|p| p.precision == 1.0));
    }

    #[test]
    fn threshold_examples() {
        let r = recs(&[(0.6, true), (0.7, true), (0.5, false), (0.4, false)]);
        let t = select_threshold(&r).unwrap();
        assert!((t - 0.55).abs() < 1e-15);
        let m = confusion_at(&r, t);
        assert_eq!((m.tp, m.fp, m.fn_, m.tn), (2, 0, 0, 2));

        let r = recs(&[(0.8, true), (0.95, true), (0.1, false), (0.3, false)]);
        assert!((select_threshold(&r).unwrap() - 0.55).abs() < 1e-15);
    }

    #[test]
    fn inverted_scores_choose_a_sentinel() {
        // every negative above every positive: best is all-positive or
        // all-negative (2 errors each); smallest candidate wins
        let r = recs(&[(0.2, true), (0.1, true), (0.8, false), (0.9, false)]);
        let t = select_threshold(&r).unwrap();
        assert_eq!(t, 0.05);
        let m = confusion_at(&r, t);
        assert_eq!((m.fn_, m.tn), (0, 0));
    }

    #[test]
    fn top_sentinel_above_one() {
        let c = candidate_thresholds(&recs(&[(0.0, true), (1.0, false)]));
        assert_eq!(c[0], 0.0);
        assert_eq!(c[1], 0.5);
        assert!(c[2] > 1.0);
    }

    #[test]
    fn cost_ratio_moves_threshold() {
        // heavier false positives push the threshold above the lone high negative
        let r = recs(&[(0.3, true), (0.5, true), (0.6, false), (0.7, true), (0.9, true)]);
        let equal = select_threshold(&r).unwrap();
        assert!((equal - 0.15).abs() < 1e-15);
        let heavy = select_threshold_weighted(&r, 3.0).unwrap();
        assert!((heavy - 0.65).abs() < 1e-15);
        assert!(select_threshold_weighted(&r, 0.0).is_err());
    }

    #[test]
    fn confusion_edge_cases() {
        let r = recs(&[(0.3, true), (0.1, false), (0.0, false)]);
        let m = confusion_at(&r, 0.0);
        assert_eq!((m.fn_, m.tn), (0, 0));
        let m = confusion_at::<f64>(&[], 0.5);
        assert_eq!((m.tp, m.fp, m.fn_, m.tn), (0, 0, 0, 0));
    }

    #[test]
    fn report_composes_and_ignores_order() {
        let r = recs(&[(0.9, true), (0.8, true), (0.3, false), (0.1, false)]);
        let a = build_model_report(&r, meta()).unwrap();
        assert_eq!(a.roc.auc, 1.0);
        assert_eq!(a.accuracy, 1.0);
        assert_eq!(a.confusion.threshold, a.chosen_threshold);
        let mut shuffled = r.clone();
        shuffled.swap(0, 3);
        shuffled.swap(1, 2);
        assert_eq!(build_model_report(&shuffled, meta()).unwrap(), a);
    }

    #[test]
    fn works_in_single_precision() {
        let r: Vec<EvalRecord<f32>> = [(0.9f32, true), (0.4, false), (0.35, true), (0.1, false)]
            .iter()
            .map(|&(s, l)| EvalRecord::new(s, l).unwrap())
            .collect();
        assert!((roc_curve(&r).unwrap().auc - 0.75).abs() < 1e-6);
    }

    #[test]
    fn csv_ingestion() {
        let r: Vec<EvalRecord<f64>> = read_eval_csv("score,label\n0.9,1\n0.2,0\n".as_bytes(), "eval.csv").unwrap();
        assert_eq!(r, recs(&[(0.9, true), (0.2, false)]));
        let bad = read_eval_csv::<f64, _>("score,label\n0.9,2\n".as_bytes(), "eval.csv");
        assert!(matches!(bad, Err(Error::Csv { line: 2, .. })));
        let bad = read_eval_csv::<f64, _>("score,label\n1.5,1\n".as_bytes(), "eval.csv");
        assert!(bad.is_err());
        let bad = read_eval_csv::<f64, _>("label,score\n1,0.5\n".as_bytes(), "eval.csv");
        assert!(matches!(bad, Err(Error::Csv { line: 1, .. })));
    }

    #[test]
    fn curve_csv_export() {
        let r = recs(&[(0.9, true), (0.1, false)]);
        assert_eq!(roc_csv(&roc_curve(&r).unwrap()), "fpr,tpr\n0,0\n0,1\n1,1\n");
        assert_eq!(pr_csv(&pr_curve(&r).unwrap()), "recall,precision\n0,1\n1,1\n1,0.5\n");
    }

    fn arb_records() -> impl Strategy<Value = Vec<EvalRecord<f64>>> {
        // scores on a coarse grid so ties are common
        proptest::collection::vec((0u8..=20, any::<bool>()), 2..50)
            .prop_map(|v| v.into_iter().map(|(k, l)| EvalRecord { score: k as f64 / 20.0, label: l }).collect())
    }

    proptest! {
        #[test]
        fn trapezoid_matches_rank_statistic(r in arb_records()) {
            prop_assume!(r.iter().any(|x| x.label) && r.iter().any(|x| !x.label));
            let roc = roc_curve(&r).unwrap();
            prop_assert!((roc.auc - pairwise_auc(&r)).abs() <= 1e-9);
            for w in roc.points.windows(2) {
                prop_assert!(w[0].fpr <= w[1].fpr && w[0].tpr <= w[1].tpr);
            }
            let mut dup = r.clone();
            dup.push(r[0]);
            let again = roc_curve(&dup).unwrap();
            prop_assert_eq!(again.points.first().copied(), Some(RocPoint { fpr: 0.0, tpr: 0.0 }));
            prop_assert_eq!(again.points.last().copied(), Some(RocPoint { fpr: 1.0, tpr: 1.0 }));
        }

        #[test]
        fn pr_recall_nondecreasing(r in arb_records()) {
            prop_assume!(r.iter().any(|x| x.label));
            let pr = pr_curve(&r).unwrap();
            for w in pr.points.windows(2) {
                prop_assert!(w[0].recall <= w[1].recall);
            }
            prop_assert!(pr.points.iter().all(|p| (0.0..=1.0).contains(&p.precision)));
        }

        #[test]
        fn confusion_sums_to_n(r in arb_records(), t in 0.0f64..=1.0) {
            let m = confusion_at(&r, t);
            prop_assert_eq!(m.total(), r.len());
            prop_assert!((0.0..=1.0).contains(&m.accuracy()));
        }

        #[test]
        fn threshold_invariant_under_monotone_transform(r in arb_records()) {
            prop_assume!(r.iter().any(|x| x.label) && r.iter().any(|x| !x.label));
            let squashed: Vec<_> = r.iter().map(|x| EvalRecord { score: x.score.powi(3), label: x.label }).collect();
            let a = confusion_at(&r, select_threshold(&r).unwrap());
            let b = confusion_at(&squashed, select_threshold(&squashed).unwrap());
            prop_assert_eq!((a.tp, a.fp, a.fn_, a.tn), (b.tp, b.fp, b.fn_, b.tn));
        }

        #[test]
        fn permutation_invariant(r in arb_records(), seed in any::<u64>()) {
            prop_assume!(r.iter().any(|x| x.label) && r.iter().any(|x| !x.label));
            let mut shuffled = r.clone();
            let n = shuffled.len();
            let mut state = seed | 1;
            for i in (1..n).rev() {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                shuffled.swap(i, (state % (i as u64 + 1)) as usize);
            }
            prop_assert_eq!(build_model_report(&r, meta()).unwrap(), build_model_report(&shuffled, meta()).unwrap());
        }
    }
}
