//! Scoring of predicted premise lists and aggregation into metrics.
//!
//! A prediction is correct iff its set of formulas equals the gold set. Wrong
//! predictions are labelled on the part of the prediction that lies inside the
//! knowledge base: NVM (a strict superset of gold), MAP (some gold A-premise
//! missing) or residual. HP flags any item that is unreadable or not a premise
//! of the knowledge base and may accompany any of the three.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::logic::{Formula, KnowledgeBase, Quantifier};
use crate::render::{parse_premise_list, Assignment};

/// Cells per type counted as the shortest or longest band.
pub const BAND: usize = 5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ErrorLabel {
    pub nvm: bool,
    pub map: bool,
    pub hp: bool,
    /// `|P \ gold|` for NVM errors, else 0.
    pub extra_count: usize,
    /// Gold A-premises absent from the prediction, for MAP errors, else 0.
    pub missing_a_count: usize,
}

impl ErrorLabel {
    pub fn is_residual(&self) -> bool {
        !self.nvm && !self.map
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Outcome {
    Correct,
    Error(ErrorLabel),
}

impl Outcome {
    pub fn is_correct(&self) -> bool {
        matches!(self, Outcome::Correct)
    }
}

/// The premise list inside a model's output: whatever follows the last
/// `premises:` marker (or the whole text), up to the first line break.
pub fn extract_premise_text(raw: &str) -> &str {
    let lower = raw.to_ascii_lowercase();
    let start = lower.rfind("premises:").map_or(0, |i| i + "premises:".len());
    let rest = &raw[start..];
    rest.split(['\n', '\r']).next().unwrap_or("").trim()
}

/// Scores one prediction. `gold` are the gold premise formulas; word lookup
/// goes through `asg`. Items match premises in their surface form, so `No b
/// are a` does not name the premise `No a are b`.
pub fn score(kb: &KnowledgeBase, gold: &[Formula], asg: &Assignment, raw_text: &str) -> Outcome {
    let items = parse_premise_list(extract_premise_text(raw_text), asg);
    let mut hp = false;
    let mut predicted: BTreeSet<Formula> = BTreeSet::new();
    let mut in_kb: BTreeSet<Formula> = BTreeSet::new();
    for item in items {
        match item.parsed {
            Ok(f) => {
                predicted.insert(f);
                if kb.position(&f).is_some() {
                    in_kb.insert(f);
                } else {
                    hp = true;
                }
            }
            Err(_) => hp = true,
        }
    }
    let gold: BTreeSet<Formula> = gold.iter().copied().collect();
    if !hp && predicted == gold {
        return Outcome::Correct;
    }
    let mut label = ErrorLabel { hp, ..ErrorLabel::default() };
    if gold.is_subset(&in_kb) && in_kb.len() > gold.len() {
        label.nvm = true;
        label.extra_count = in_kb.len() - gold.len();
    } else {
        let missing = gold.iter().filter(|f| f.q == Quantifier::A && !in_kb.contains(f)).count();
        if missing > 0 {
            label.map = true;
            label.missing_a_count = missing;
        }
    }
    Outcome::Error(label)
}

/// A scored prediction with the gold query's cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scored {
    pub itype: u8,
    pub length: usize,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellAccuracy {
    pub itype: u8,
    pub length: usize,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    pub total: usize,
    pub correct: usize,
    pub accuracy_all: f64,
    pub short_total: usize,
    pub accuracy_short: f64,
    pub long_total: usize,
    pub accuracy_long: f64,
    pub cells: Vec<CellAccuracy>,
    pub error_count: usize,
    pub nvm_count: usize,
    pub nvm_pct: f64,
    pub avg_nvm: f64,
    pub map_count: usize,
    pub map_pct: f64,
    pub avg_map: f64,
    pub hp_count: usize,
    pub hp_pct: f64,
    pub residual_count: usize,
    pub residual_pct: f64,
    pub notes: Vec<String>,
}

fn pct(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        100.0 * n as f64 / d as f64
    }
}

fn mean(sum: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

/// Which band a cell falls in: the [`BAND`] shortest lengths of its type are
/// short, the [`BAND`] longest that are not short are long.
fn bands(cells: &BTreeMap<(u8, usize), (usize, usize)>) -> BTreeMap<(u8, usize), (bool, bool)> {
    let mut by_type: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for &(t, l) in cells.keys() {
        by_type.entry(t).or_default().push(l);
    }
    let mut out = BTreeMap::new();
    for (t, lens) in by_type {
        let short: Vec<usize> = lens.iter().copied().take(BAND).collect();
        let long: Vec<usize> = lens.iter().rev().copied().filter(|l| !short.contains(l)).take(BAND).collect();
        for l in lens {
            out.insert((t, l), (short.contains(&l), long.contains(&l)));
        }
    }
    out
}

pub fn aggregate(records: &[Scored]) -> MetricsReport {
    let mut cells: BTreeMap<(u8, usize), (usize, usize)> = BTreeMap::new();
    let (mut nvm, mut map, mut hp, mut residual) = (0, 0, 0, 0);
    let (mut extra, mut missing) = (0, 0);
    for r in records {
        let c = cells.entry((r.itype, r.length)).or_default();
        c.0 += 1;
        match r.outcome {
            Outcome::Correct => c.1 += 1,
            Outcome::Error(e) => {
                if e.nvm {
                    nvm += 1;
                    extra += e.extra_count;
                } else if e.map {
                    map += 1;
                    missing += e.missing_a_count;
                } else {
                    residual += 1;
                }
                hp += usize::from(e.hp);
            }
        }
    }
    let band = bands(&cells);
    let (mut st, mut sc, mut lt, mut lc) = (0, 0, 0, 0);
    for (k, &(total, correct)) in &cells {
        let (s, l) = band[k];
        if s {
            st += total;
            sc += correct;
        }
        if l {
            lt += total;
            lc += correct;
        }
    }
    let total = records.len();
    let correct: usize = cells.values().map(|c| c.1).sum();
    let errors = total - correct;
    MetricsReport {
        total,
        correct,
        accuracy_all: pct(correct, total),
        short_total: st,
        accuracy_short: pct(sc, st),
        long_total: lt,
        accuracy_long: pct(lc, lt),
        cells: cells
            .iter()
            .map(|(&(itype, length), &(t, c))| CellAccuracy {
                itype,
                length,
                total: t,
                correct: c,
                accuracy: pct(c, t),
            })
            .collect(),
        error_count: errors,
        nvm_count: nvm,
        nvm_pct: pct(nvm, errors),
        avg_nvm: mean(extra, nvm),
        map_count: map,
        map_pct: pct(map, errors),
        avg_map: mean(missing, map),
        hp_count: hp,
        hp_pct: pct(hp, errors),
        residual_count: residual,
        residual_pct: pct(residual, errors),
        notes: alloc::vec![
            "error percentages use the error count as denominator".to_string(),
            "hallucinated items are excluded from the NVM extra count".to_string(),
        ],
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiffEntry {
    pub field: String,
    pub left: String,
    pub right: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReportDiff {
    pub entries: Vec<DiffEntry>,
}

impl ReportDiff {
    pub fn passes(&self) -> bool {
        self.entries.is_empty()
    }

    fn push(&mut self, field: impl Into<String>, left: impl ToString, right: impl ToString) {
        self.entries.push(DiffEntry { field: field.into(), left: left.to_string(), right: right.to_string() });
    }
}

/// Differences between two reports. Percentages and averages may differ by
/// up to `tol`; counts and the set of cells must match exactly.
pub fn compare_reports(a: &MetricsReport, b: &MetricsReport, tol: f64) -> ReportDiff {
    let mut d = ReportDiff::default();
    let counts = [
        ("total", a.total, b.total),
        ("correct", a.correct, b.correct),
        ("short_total", a.short_total, b.short_total),
        ("long_total", a.long_total, b.long_total),
        ("error_count", a.error_count, b.error_count),
        ("nvm_count", a.nvm_count, b.nvm_count),
        ("map_count", a.map_count, b.map_count),
        ("hp_count", a.hp_count, b.hp_count),
        ("residual_count", a.residual_count, b.residual_count),
    ];
    for (name, x, y) in counts {
        if x != y {
            d.push(name, x, y);
        }
    }
    let reals = [
        ("accuracy_all", a.accuracy_all, b.accuracy_all),
        ("accuracy_short", a.accuracy_short, b.accuracy_short),
        ("accuracy_long", a.accuracy_long, b.accuracy_long),
        ("nvm_pct", a.nvm_pct, b.nvm_pct),
        ("avg_nvm", a.avg_nvm, b.avg_nvm),
        ("map_pct", a.map_pct, b.map_pct),
        ("avg_map", a.avg_map, b.avg_map),
        ("hp_pct", a.hp_pct, b.hp_pct),
        ("residual_pct", a.residual_pct, b.residual_pct),
    ];
    for (name, x, y) in reals {
        if (x - y).abs() > tol {
            d.push(name, x, y);
        }
    }
    let index = |r: &MetricsReport| -> BTreeMap<(u8, usize), (usize, usize, f64)> {
        r.cells.iter().map(|c| ((c.itype, c.length), (c.total, c.correct, c.accuracy))).collect()
    };
    let (ia, ib) = (index(a), index(b));
    for (k, va) in &ia {
        let name = format!("cell {}:{}", k.0, k.1);
        match ib.get(k) {
            None => d.push(name, "present", "missing"),
            Some(vb) if va.0 != vb.0 || va.1 != vb.1 || (va.2 - vb.2).abs() > tol => {
                d.push(name, format!("{}/{}", va.1, va.0), format!("{}/{}", vb.1, vb.0))
            }
            Some(_) => {}
        }
    }
    for k in ib.keys().filter(|k| !ia.contains_key(k)) {
        d.push(format!("cell {}:{}", k.0, k.1), "missing", "present");
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn setup() -> (KnowledgeBase, Vec<Formula>, Assignment) {
        let kb = KnowledgeBase::new(
            "k",
            6,
            vec![Formula::a(0, 1), Formula::a(1, 2), Formula::e(2, 3), Formula::a(4, 5), Formula::i(3, 5)],
        )
        .unwrap();
        let gold = vec![Formula::a(0, 1), Formula::a(1, 2), Formula::e(2, 3)];
        (kb, gold, Assignment::indexed(6))
    }

    #[test]
    fn examples() {
        let (kb, gold, asg) = setup();
        let s = |t: &str| score(&kb, &gold, &asg, t);
        assert_eq!(s("No x3 are x4, All x1 are x2, all x2 are x3"), Outcome::Correct);
        let Outcome::Error(e) = s("All x1 are x2, All x2 are x3, No x4 are x3") else { panic!() };
        assert!(e.hp && e.is_residual());
        let Outcome::Error(e) = s("All x1 are x2, All x2 are x3, No x3 are x4, All x5 are x6") else { panic!() };
        assert!(e.nvm && !e.map && !e.hp && e.extra_count == 1);
        let Outcome::Error(e) = s("All x1 are x2, No x3 are x4, All x7 are x1") else { panic!() };
        assert!(e.map && e.hp && !e.nvm && e.missing_a_count == 1);
        let Outcome::Error(e) = s("All x1 are x2, All x2 are x3") else { panic!() };
        assert!(e.is_residual() && !e.hp);
        let Outcome::Error(e) = s("All x1 are x2, All x2 are x3, No x3 are x4, gibberish") else { panic!() };
        assert!(e.is_residual() && e.hp);
    }

    #[test]
    fn extraction() {
        assert_eq!(extract_premise_text("hypothesis: All a are b premises: All a are c\nmore"), "All a are c");
        assert_eq!(extract_premise_text("  All a are c  "), "All a are c");
    }

    #[test]
    fn aggregate_percentages() {
        let err = |nvm, map, hp| {
            Outcome::Error(ErrorLabel {
                nvm,
                map,
                hp,
                extra_count: usize::from(nvm) * 2,
                missing_a_count: usize::from(map),
            })
        };
        let rec = |l, o| Scored { itype: 2, length: l, outcome: o };
        let r = aggregate(&[
            rec(1, Outcome::Correct),
            rec(1, err(true, false, false)),
            rec(2, err(false, true, true)),
            rec(2, err(false, true, false)),
            rec(3, err(false, false, false)),
        ]);
        assert_eq!((r.total, r.correct, r.error_count), (5, 1, 4));
        assert_eq!(r.nvm_pct, 25.0);
        assert_eq!(r.map_pct, 50.0);
        assert_eq!(r.hp_pct, 25.0);
        assert_eq!(r.residual_pct, 25.0);
        assert_eq!(r.avg_nvm, 2.0);
        assert_eq!(r.short_total, 5);
        assert_eq!(r.long_total, 0);
        assert!(compare_reports(&r, &r, 0.0).passes());
        let mut r2 = r.clone();
        r2.accuracy_all += 0.5;
        assert!(compare_reports(&r, &r2, 1.0).passes());
        r2.cells.pop();
        assert!(!compare_reports(&r, &r2, 1.0).passes());
        let all = aggregate(&[rec(1, Outcome::Correct)]);
        assert_eq!((all.accuracy_all, all.nvm_pct, all.error_count), (100.0, 0.0, 0));
    }
}
