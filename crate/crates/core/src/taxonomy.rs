//! The five-category intent taxonomy, annotation aggregation and the
//! distribution / co-occurrence analytics built on top of it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stats;

/// Base intent categories, ordered as in the taxonomy tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IntentLabel {
    ParticularCase,
    Characterization,
    Penalty,
    Procedure,
    Interest,
}

impl IntentLabel {
    pub const ALL: [IntentLabel; 5] = [
        IntentLabel::ParticularCase,
        IntentLabel::Characterization,
        IntentLabel::Penalty,
        IntentLabel::Procedure,
        IntentLabel::Interest,
    ];

    /// Intents covered by the laboratory study and the ranking experiments.
    pub const STUDIED: [IntentLabel; 4] = [
        IntentLabel::ParticularCase,
        IntentLabel::Characterization,
        IntentLabel::Penalty,
        IntentLabel::Procedure,
    ];

    pub fn code(self) -> &'static str {
        match self {
            IntentLabel::ParticularCase => "PC",
            IntentLabel::Characterization => "Ch",
            IntentLabel::Penalty => "Pe",
            IntentLabel::Procedure => "Pr",
            IntentLabel::Interest => "In",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Learning intents share the `Le` node under the first criterion.
    pub fn is_learning(self) -> bool {
        self != IntentLabel::ParticularCase
    }
}

impl fmt::Display for IntentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for IntentLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IntentLabel::ALL
            .into_iter()
            .find(|l| l.code() == s)
            .ok_or_else(|| Error::validation(format!("unknown intent code {s:?}")))
    }
}

impl Serialize for IntentLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for IntentLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let code = String::deserialize(d)?;
        code.parse().map_err(serde::de::Error::custom)
    }
}

/// A label an annotator can pick: a base intent, Others or Multi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LabelValue {
    Intent(IntentLabel),
    Others,
    Multi,
}

impl LabelValue {
    pub const ALL: [LabelValue; 7] = [
        LabelValue::Intent(IntentLabel::ParticularCase),
        LabelValue::Intent(IntentLabel::Characterization),
        LabelValue::Intent(IntentLabel::Penalty),
        LabelValue::Intent(IntentLabel::Procedure),
        LabelValue::Intent(IntentLabel::Interest),
        LabelValue::Others,
        LabelValue::Multi,
    ];

    pub fn code(self) -> &'static str {
        match self {
            LabelValue::Intent(i) => i.code(),
            LabelValue::Others => "O",
            LabelValue::Multi => "M",
        }
    }

    pub fn index(self) -> usize {
        match self {
            LabelValue::Intent(i) => i.index(),
            LabelValue::Others => 5,
            LabelValue::Multi => 6,
        }
    }

    pub fn intent(self) -> Option<IntentLabel> {
        match self {
            LabelValue::Intent(i) => Some(i),
            _ => None,
        }
    }
}

impl From<IntentLabel> for LabelValue {
    fn from(i: IntentLabel) -> Self {
        LabelValue::Intent(i)
    }
}

impl fmt::Display for LabelValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for LabelValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "O" => Ok(LabelValue::Others),
            "M" => Ok(LabelValue::Multi),
            other => other.parse().map(LabelValue::Intent),
        }
    }
}

impl Serialize for LabelValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for LabelValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let code = String::deserialize(d)?;
        code.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatorLabel {
    pub value: LabelValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential_intents: Option<Vec<IntentLabel>>,
}

impl AnnotatorLabel {
    pub fn new(value: impl Into<LabelValue>) -> Self {
        AnnotatorLabel {
            value: value.into(),
            explanation: None,
            potential_intents: None,
        }
    }

    pub fn multi(intents: &[IntentLabel], explanation: &str) -> Self {
        AnnotatorLabel {
            value: LabelValue::Multi,
            explanation: Some(explanation.to_string()),
            potential_intents: Some(intents.to_vec()),
        }
    }

    /// Checks the annotator-side contract: Others and Multi carry an
    /// explanation, and a Multi's potential intents name at least two.
    pub fn validate(&self) -> Result<()> {
        let needs_explanation = matches!(self.value, LabelValue::Others | LabelValue::Multi);
        if needs_explanation
            && self
                .explanation
                .as_deref()
                .map_or(true, |e| e.trim().is_empty())
        {
            return Err(Error::validation(format!(
                "label {} requires an explanation",
                self.value
            )));
        }
        if let Some(intents) = &self.potential_intents {
            if self.value != LabelValue::Multi {
                return Err(Error::validation(format!(
                    "potential_intents only allowed on M labels, found on {}",
                    self.value
                )));
            }
            let distinct: BTreeSet<_> = intents.iter().collect();
            if distinct.len() < 2 {
                return Err(Error::validation(
                    "an M label must list at least two potential intents",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub item_id: String,
    pub labels: Vec<AnnotatorLabel>,
}

impl AnnotationSet {
    pub fn validate(&self) -> Result<()> {
        if self.labels.is_empty() {
            return Err(Error::validation(format!("item {} has no labels", self.item_id)));
        }
        for label in &self.labels {
            label
                .validate()
                .map_err(|e| Error::validation(format!("item {}: {e}", self.item_id)))?;
        }
        Ok(())
    }
}

/// Validates a whole collection, including item id uniqueness.
pub fn validate_collection(sets: &[AnnotationSet]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for set in sets {
        set.validate()?;
        if !seen.insert(set.item_id.as_str()) {
            return Err(Error::validation(format!("duplicate item_id {}", set.item_id)));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Purpose {
    ParticularCase,
    Learning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemKind {
    Characterization,
    Penalty,
    Procedure,
}

/// Answers to the three successive classification criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriteriaAnswers {
    pub purpose: Purpose,
    pub clear_objective: Option<bool>,
    pub problem_kind: Option<ProblemKind>,
}

pub fn classify_by_criteria(answers: &CriteriaAnswers) -> Result<IntentLabel> {
    match answers.purpose {
        Purpose::ParticularCase => {
            if answers.clear_objective.is_some() {
                return Err(Error::validation(
                    "criterion 2 must be unanswered when criterion 1 is ParticularCase",
                ));
            }
            if answers.problem_kind.is_some() {
                return Err(Error::validation(
                    "criterion 3 must be unanswered when criterion 1 is ParticularCase",
                ));
            }
            Ok(IntentLabel::ParticularCase)
        }
        Purpose::Learning => match answers.clear_objective {
            None => Err(Error::validation(
                "criterion 2 (clear objective) is required for Learning",
            )),
            Some(false) => {
                if answers.problem_kind.is_some() {
                    return Err(Error::validation(
                        "criterion 3 must be unanswered without a clear objective",
                    ));
                }
                Ok(IntentLabel::Interest)
            }
            Some(true) => match answers.problem_kind {
                None => Err(Error::validation(
                    "criterion 3 (problem kind) is required with a clear objective",
                )),
                Some(ProblemKind::Characterization) => Ok(IntentLabel::Characterization),
                Some(ProblemKind::Penalty) => Ok(IntentLabel::Penalty),
                Some(ProblemKind::Procedure) => Ok(IntentLabel::Procedure),
            },
        },
    }
}

/// Majority vote over one item's annotator labels.
///
/// A value wins when it is the strict plurality and at least `ceil(n/2)`
/// annotators chose it; anything else aggregates to Multi. For three
/// annotators this is "two or more agree, else Multi". An aggregated Multi
/// carries the item's possible intents: the union of the winning Multi
/// labels' potential intents, or every base intent named when no majority
/// exists.
pub fn aggregate_majority(set: &AnnotationSet) -> Result<AnnotatorLabel> {
    let n = set.labels.len();
    if n == 0 {
        return Err(Error::validation(format!("item {} has no labels", set.item_id)));
    }
    let mut counts: BTreeMap<LabelValue, usize> = BTreeMap::new();
    for l in &set.labels {
        *counts.entry(l.value).or_default() += 1;
    }
    let top = counts.values().copied().max().unwrap_or(0);
    let leaders: Vec<LabelValue> = counts
        .iter()
        .filter(|(_, &c)| c == top)
        .map(|(v, _)| *v)
        .collect();
    let winner = (leaders.len() == 1 && top >= n.div_ceil(2)).then(|| leaders[0]);

    match winner {
        Some(LabelValue::Multi) => {
            let intents: BTreeSet<IntentLabel> = set
                .labels
                .iter()
                .filter(|l| l.value == LabelValue::Multi)
                .flat_map(|l| l.potential_intents.iter().flatten().copied())
                .collect();
            Ok(AnnotatorLabel {
                value: LabelValue::Multi,
                explanation: None,
                potential_intents: (!intents.is_empty()).then(|| intents.into_iter().collect()),
            })
        }
        Some(value) => Ok(AnnotatorLabel::new(value)),
        None => {
            let mut intents = BTreeSet::new();
            for l in &set.labels {
                match l.value {
                    LabelValue::Intent(i) => {
                        intents.insert(i);
                    }
                    LabelValue::Multi => intents.extend(l.potential_intents.iter().flatten()),
                    LabelValue::Others => {}
                }
            }
            Ok(AnnotatorLabel {
                value: LabelValue::Multi,
                explanation: None,
                potential_intents: Some(intents.into_iter().collect()),
            })
        }
    }
}

/// Share of each aggregated label; only labels that occur get an entry.
pub fn intent_distribution(aggregated: &[AnnotatorLabel]) -> Result<BTreeMap<LabelValue, f64>> {
    if aggregated.is_empty() {
        return Err(Error::validation("intent distribution of an empty list"));
    }
    let mut counts: BTreeMap<LabelValue, usize> = BTreeMap::new();
    for l in aggregated {
        *counts.entry(l.value).or_default() += 1;
    }
    let n = aggregated.len() as f64;
    Ok(counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / n))
        .collect())
}

/// Normalized co-occurrence of intents inside Multi items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooccurrenceMatrix<F> {
    /// Symmetric, indexed by [`IntentLabel::index`]; zero diagonal.
    pub matrix: [[F; 5]; 5],
    /// Pair tokens counted before normalization.
    pub pairs: usize,
    /// Items whose possible-intent set had fewer than two intents, or which
    /// did not aggregate to Multi.
    pub skipped: usize,
}

impl<F: Real> CooccurrenceMatrix<F> {
    pub fn get(&self, a: IntentLabel, b: IntentLabel) -> F {
        self.matrix[a.index()][b.index()]
    }
}

/// Counts each intent pair in every Multi item's possible-intent set once,
/// then divides by the total number of pair tokens so the upper triangle
/// sums to one.
pub fn cooccurrence_matrix<F: Real>(sets: &[AnnotationSet]) -> Result<CooccurrenceMatrix<F>> {
    let mut counts = [[0usize; 5]; 5];
    let mut pairs = 0usize;
    let mut skipped = 0usize;
    for set in sets {
        let agg = aggregate_majority(set)?;
        let intents: BTreeSet<IntentLabel> = match (agg.value, agg.potential_intents) {
            (LabelValue::Multi, Some(list)) => list.into_iter().collect(),
            _ => BTreeSet::new(),
        };
        if intents.len() < 2 {
            skipped += 1;
            continue;
        }
        let list: Vec<IntentLabel> = intents.into_iter().collect();
        for (i, a) in list.iter().enumerate() {
            for b in &list[i + 1..] {
                counts[a.index()][b.index()] += 1;
                counts[b.index()][a.index()] += 1;
                pairs += 1;
            }
        }
    }
    let mut matrix = [[F::zero(); 5]; 5];
    if pairs > 0 {
        let total = F::from_usize_lossy(pairs);
        for (row, counts_row) in matrix.iter_mut().zip(&counts) {
            for (cell, &c) in row.iter_mut().zip(counts_row) {
                *cell = F::from_usize_lossy(c) / total;
            }
        }
    }
    Ok(CooccurrenceMatrix {
        matrix,
        pairs,
        skipped,
    })
}

/// Items x 7 label-count matrix for agreement statistics.
pub fn agreement_counts(sets: &[AnnotationSet]) -> Vec<[usize; 7]> {
    sets.iter()
        .map(|set| {
            let mut row = [0usize; 7];
            for l in &set.labels {
                row[l.value.index()] += 1;
            }
            row
        })
        .collect()
}

/// Fleiss's kappa across annotators over the seven annotation choices.
pub fn annotation_kappa(sets: &[AnnotationSet]) -> Result<f64> {
    stats::fleiss_kappa(&agreement_counts(sets))
}
