//! Pivoting long-format measurements into subject-by-column tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::table::MeasurementTable;
use crate::error::{Error, Result};

/// One ROM value in long format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub subject: String,
    pub movement: String,
    pub rater: String,
    pub repetition: u32,
    pub rom_deg: f64,
}

/// How repetitions enter an inter-rater table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterRaterLayout {
    /// One row per (subject, repetition).
    #[default]
    Pooled,
    /// One row per subject holding the mean over repetitions.
    Averaged,
}

impl InterRaterLayout {
    pub fn as_str(self) -> &'static str {
        match self {
            InterRaterLayout::Pooled => "pooled",
            InterRaterLayout::Averaged => "averaged",
        }
    }
}

impl fmt::Display for InterRaterLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InterRaterLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pooled" => Ok(InterRaterLayout::Pooled),
            "averaged" => Ok(InterRaterLayout::Averaged),
            _ => Err(Error::Config(format!(
                "unknown inter-rater layout `{s}`; expected pooled or averaged"
            ))),
        }
    }
}

/// Movements in order of first appearance.
pub fn movements(data: &[Measurement]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    data.iter()
        .filter(|m| seen.insert(m.movement.as_str()))
        .map(|m| m.movement.clone())
        .collect()
}

/// Raters recorded for a movement, sorted.
pub fn raters(data: &[Measurement], movement: &str) -> Vec<String> {
    data.iter()
        .filter(|m| m.movement == movement)
        .map(|m| m.rater.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Rejects repeated (subject, movement, rater, repetition) keys.
pub fn check_unique(data: &[Measurement]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for m in data {
        if !seen.insert((&m.subject, &m.movement, &m.rater, m.repetition)) {
            return Err(Error::InsufficientData(format!(
                "{}: duplicate measurement for subject {}, rater {}, repetition {}",
                m.movement, m.subject, m.rater, m.repetition
            )));
        }
    }
    Ok(())
}

type Cells = BTreeMap<String, BTreeMap<u32, f64>>;

fn cells(data: &[Measurement], movement: &str, rater: &str) -> Cells {
    let mut out: Cells = BTreeMap::new();
    for m in data.iter().filter(|m| m.movement == movement && m.rater == rater) {
        out.entry(m.subject.clone())
            .or_default()
            .insert(m.repetition, m.rom_deg);
    }
    out
}

fn build(movement: &str, values: Vec<Vec<f64>>, rows: Vec<String>, cols: Vec<String>) -> Result<MeasurementTable> {
    MeasurementTable::new(values, rows, cols).map_err(|e| e.context(movement.to_string()))
}

/// Subjects by repetitions for one rater.
pub fn test_retest_table(data: &[Measurement], movement: &str, rater: &str) -> Result<MeasurementTable> {
    check_unique(data)?;
    let by_subject = cells(data, movement, rater);
    if by_subject.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{movement}: no measurements for rater {rater}"
        )));
    }
    let reps: BTreeSet<u32> = by_subject.values().flat_map(|r| r.keys().copied()).collect();
    let mut values = Vec::with_capacity(by_subject.len());
    for (subject, row) in &by_subject {
        let mut cells = Vec::with_capacity(reps.len());
        for rep in &reps {
            let v = row.get(rep).ok_or_else(|| {
                Error::InsufficientData(format!(
                    "{movement}: rater {rater} has no repetition {rep} for subject {subject}"
                ))
            })?;
            cells.push(*v);
        }
        values.push(cells);
    }
    build(
        movement,
        values,
        by_subject.keys().cloned().collect(),
        reps.iter().map(|r| format!("rep{r}")).collect(),
    )
}

/// Rows paired across two raters; columns are `[first, second]`.
pub fn inter_rater_table(
    data: &[Measurement],
    movement: &str,
    first: &str,
    second: &str,
    layout: InterRaterLayout,
) -> Result<MeasurementTable> {
    check_unique(data)?;
    let a = cells(data, movement, first);
    let b = cells(data, movement, second);
    for (name, c) in [(first, &a), (second, &b)] {
        if c.is_empty() {
            return Err(Error::InsufficientData(format!(
                "{movement}: no measurements for rater {name}"
            )));
        }
    }
    let subjects: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for subject in subjects {
        let (ra, rb) = match (a.get(subject), b.get(subject)) {
            (Some(ra), Some(rb)) => (ra, rb),
            _ => {
                return Err(Error::InsufficientData(format!(
                    "{movement}: subject {subject} is not measured by both {first} and {second}"
                )))
            }
        };
        match layout {
            InterRaterLayout::Pooled => {
                let reps: BTreeSet<u32> = ra.keys().chain(rb.keys()).copied().collect();
                for rep in reps {
                    match (ra.get(&rep), rb.get(&rep)) {
                        (Some(x), Some(y)) => {
                            values.push(vec![*x, *y]);
                            labels.push(format!("{subject}/rep{rep}"));
                        }
                        _ => {
                            return Err(Error::InsufficientData(format!(
                                "{movement}: repetition {rep} of subject {subject} is not measured by both {first} and {second}"
                            )))
                        }
                    }
                }
            }
            InterRaterLayout::Averaged => {
                let mean = |r: &BTreeMap<u32, f64>| r.values().sum::<f64>() / r.len() as f64;
                values.push(vec![mean(ra), mean(rb)]);
                labels.push(subject.clone());
            }
        }
    }
    build(movement, values, labels, vec![first.to_string(), second.to_string()])
}
