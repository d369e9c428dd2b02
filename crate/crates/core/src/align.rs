//! Character-level Levenshtein alignment.
//!
//! Characters are Unicode scalar values; inputs are expected in NFC.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distance::EditWeightMatrix;

/// Cost model for the alignment dynamic program.
pub trait EditCosts {
    /// Cost of turning `a` into `b`; must be 0 when `a == b`.
    fn substitute(&self, a: char, b: char) -> f64;
    fn delete(&self, a: char) -> f64;
    fn insert(&self, b: char) -> f64;
}

/// Plain Levenshtein costs.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitCosts;

impl EditCosts for UnitCosts {
    fn substitute(&self, a: char, b: char) -> f64 {
        if a == b {
            0.0
        } else {
            1.0
        }
    }

    fn delete(&self, _a: char) -> f64 {
        1.0
    }

    fn insert(&self, _b: char) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Match,
    Substitute,
    Insert,
    Delete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EditOp {
    pub kind: OpKind,
    pub source: Option<char>,
    pub target: Option<char>,
}

impl EditOp {
    pub fn matched(c: char) -> Self {
        EditOp {
            kind: OpKind::Match,
            source: Some(c),
            target: Some(c),
        }
    }

    pub fn substitute(a: char, b: char) -> Self {
        EditOp {
            kind: OpKind::Substitute,
            source: Some(a),
            target: Some(b),
        }
    }

    pub fn delete(a: char) -> Self {
        EditOp {
            kind: OpKind::Delete,
            source: Some(a),
            target: None,
        }
    }

    pub fn insert(b: char) -> Self {
        EditOp {
            kind: OpKind::Insert,
            source: None,
            target: Some(b),
        }
    }

    pub fn is_match(&self) -> bool {
        self.kind == OpKind::Match
    }

    pub fn cost<C: EditCosts + ?Sized>(&self, costs: &C) -> f64 {
        match (self.source, self.target) {
            (Some(a), Some(b)) => costs.substitute(a, b),
            (Some(a), None) => costs.delete(a),
            (None, Some(b)) => costs.insert(b),
            (None, None) => 0.0,
        }
    }
}

impl fmt::Display for EditOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let seg = |c: Option<char>| c.map(String::from).unwrap_or_default();
        match self.kind {
            OpKind::Match => write!(f, "={}", seg(self.source)),
            OpKind::Substitute => write!(f, "{}→{}", seg(self.source), seg(self.target)),
            OpKind::Delete => write!(f, "-{}", seg(self.source)),
            OpKind::Insert => write!(f, "+{}", seg(self.target)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Alignment {
    pub ops: Vec<EditOp>,
}

impl Alignment {
    pub fn source(&self) -> String {
        self.ops.iter().filter_map(|op| op.source).collect()
    }

    pub fn target(&self) -> String {
        self.ops.iter().filter_map(|op| op.target).collect()
    }

    pub fn cost<C: EditCosts + ?Sized>(&self, costs: &C) -> f64 {
        self.ops.iter().map(|op| op.cost(costs)).sum()
    }
}

fn table<C: EditCosts + ?Sized>(a: &[char], b: &[char], costs: &C) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        d[i][0] = d[i - 1][0] + costs.delete(a[i - 1]);
    }
    for j in 1..=b.len() {
        d[0][j] = d[0][j - 1] + costs.insert(b[j - 1]);
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let diag = d[i - 1][j - 1] + costs.substitute(a[i - 1], b[j - 1]);
            let del = d[i - 1][j] + costs.delete(a[i - 1]);
            let ins = d[i][j - 1] + costs.insert(b[j - 1]);
            d[i][j] = diag.min(del).min(ins);
        }
    }
    d
}

pub fn distance_chars<C: EditCosts + ?Sized>(a: &[char], b: &[char], costs: &C) -> f64 {
    // two-row version of `table`
    let mut prev: Vec<f64> = Vec::with_capacity(b.len() + 1);
    prev.push(0.0);
    for j in 1..=b.len() {
        prev.push(prev[j - 1] + costs.insert(b[j - 1]));
    }
    let mut cur = vec![0.0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = prev[0] + costs.delete(a[i - 1]);
        for j in 1..=b.len() {
            let diag = prev[j - 1] + costs.substitute(a[i - 1], b[j - 1]);
            let del = prev[j] + costs.delete(a[i - 1]);
            let ins = cur[j - 1] + costs.insert(b[j - 1]);
            cur[j] = diag.min(del).min(ins);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Like [`distance_chars`] but gives up as soon as every cell of a row
/// exceeds `bound`, returning `None`. A result equal to `bound` is kept.
pub fn bounded_distance<C: EditCosts + ?Sized>(
    a: &[char],
    b: &[char],
    costs: &C,
    bound: f64,
) -> Option<f64> {
    let mut prev: Vec<f64> = Vec::with_capacity(b.len() + 1);
    prev.push(0.0);
    for j in 1..=b.len() {
        prev.push(prev[j - 1] + costs.insert(b[j - 1]));
    }
    let mut cur = vec![0.0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = prev[0] + costs.delete(a[i - 1]);
        let mut row_min = cur[0];
        for j in 1..=b.len() {
            let diag = prev[j - 1] + costs.substitute(a[i - 1], b[j - 1]);
            let del = prev[j] + costs.delete(a[i - 1]);
            let ins = cur[j - 1] + costs.insert(b[j - 1]);
            cur[j] = diag.min(del).min(ins);
            row_min = row_min.min(cur[j]);
        }
        if row_min > bound {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = prev[b.len()];
    (d <= bound).then_some(d)
}

/// One optimal alignment. Backtracking from the end prefers
/// match > substitute > delete > insert.
pub fn align_chars<C: EditCosts + ?Sized>(a: &[char], b: &[char], costs: &C) -> Alignment {
    let d = table(a, b, costs);
    let (mut i, mut j) = (a.len(), b.len());
    let mut ops = Vec::with_capacity(a.len().max(b.len()));
    while i > 0 || j > 0 {
        let here = d[i][j];
        if i > 0 && j > 0 && d[i - 1][j - 1] + costs.substitute(a[i - 1], b[j - 1]) == here {
            ops.push(if a[i - 1] == b[j - 1] {
                EditOp::matched(a[i - 1])
            } else {
                EditOp::substitute(a[i - 1], b[j - 1])
            });
            i -= 1;
            j -= 1;
        } else if i > 0 && d[i - 1][j] + costs.delete(a[i - 1]) == here {
            ops.push(EditOp::delete(a[i - 1]));
            i -= 1;
        } else {
            debug_assert!(j > 0);
            ops.push(EditOp::insert(b[j - 1]));
            j -= 1;
        }
    }
    ops.reverse();
    Alignment { ops }
}

/// Minimal edit cost; unit costs when `weights` is `None`.
pub fn edit_distance(a: &str, b: &str, weights: Option<&EditWeightMatrix>) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    match weights {
        Some(w) => distance_chars(&a, &b, w),
        None => distance_chars(&a, &b, &UnitCosts),
    }
}

pub fn align(a: &str, b: &str, weights: Option<&EditWeightMatrix>) -> Alignment {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    match weights {
        Some(w) => align_chars(&a, &b, w),
        None => align_chars(&a, &b, &UnitCosts),
    }
}
