//! Orderings on the value set and their extrema.
//!
//! Two closed-form orderings are provided: the marginal (component-wise)
//! partial order, which is only reachable through [`marginal_extrema`], and
//! the lexicographic total order. Any other total order is carried
//! explicitly as a [`RankOrder`].

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::value::{check_dim, VectorValue};

/// Which extremum to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Extremum {
    Sup,
    Inf,
}

/// Lexicographic comparison: the first differing component decides.
pub fn lex_compare(x: &[f64], y: &[f64]) -> Result<Ordering> {
    check_dim(x.len(), y.len())?;
    Ok(lex_cmp_unchecked(x, y))
}

pub(crate) fn lex_cmp_unchecked(x: &[f64], y: &[f64]) -> Ordering {
    for (a, b) in x.iter().zip(y) {
        match a.partial_cmp(b).expect("finite components") {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Component-wise supremum or infimum. The result need not be a member of `set`.
pub fn marginal_extrema<V: AsRef<[f64]>>(set: &[V], which: Extremum) -> Result<VectorValue> {
    let first = set.first().ok_or(Error::EmptySet)?.as_ref();
    let mut acc = first.to_vec();
    for v in &set[1..] {
        let v = v.as_ref();
        check_dim(acc.len(), v.len())?;
        for (a, &c) in acc.iter_mut().zip(v) {
            *a = match which {
                Extremum::Sup => a.max(c),
                Extremum::Inf => a.min(c),
            };
        }
    }
    VectorValue::new(acc)
}

/// Explicit total order: a bijection between `k` distinct values and ranks `0..k`.
#[derive(Clone, PartialEq, Eq)]
pub struct RankOrder {
    values: Vec<VectorValue>,
    ranks: HashMap<VectorValue, usize>,
}

impl RankOrder {
    /// Ranks are assigned in list position order.
    pub fn from_values(values: Vec<VectorValue>) -> Result<Self> {
        if let Some(first) = values.first() {
            let m = first.dim();
            for v in &values {
                check_dim(m, v.dim())?;
            }
        }
        let mut ranks = HashMap::with_capacity(values.len());
        for (rank, v) in values.iter().enumerate() {
            if ranks.insert(v.clone(), rank).is_some() {
                return Err(Error::InvalidImage(format!(
                    "duplicate value {:?} in rank order",
                    v.components()
                )));
            }
        }
        Ok(Self { values, ranks })
    }

    /// The lexicographic order restricted to the given values.
    pub fn lexicographic(mut values: Vec<VectorValue>) -> Result<Self> {
        values.sort_by(|a, b| lex_cmp_unchecked(a.components(), b.components()));
        values.dedup();
        Self::from_values(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values in increasing rank.
    pub fn values(&self) -> &[VectorValue] {
        &self.values
    }

    pub fn rank(&self, x: &[f64]) -> Option<usize> {
        let key = VectorValue::from_slice(x).ok()?;
        self.ranks.get(&key).copied()
    }

    pub fn rank_or_err(&self, x: &[f64]) -> Result<usize> {
        self.rank(x).ok_or_else(|| Error::OutsideSupport(x.to_vec()))
    }

    pub fn value(&self, rank: usize) -> &VectorValue {
        &self.values[rank]
    }
}

impl fmt::Debug for RankOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RankOrder").field("values", &self.values).finish()
    }
}

/// An ordering scheme with well-defined extrema over finite sets.
#[derive(Clone, Debug, PartialEq)]
pub enum OrderScheme {
    Marginal,
    Lexicographic,
    Rank(RankOrder),
}

impl OrderScheme {
    pub fn is_total(&self) -> bool {
        !matches!(self, OrderScheme::Marginal)
    }

    pub fn name(&self) -> &'static str {
        match self {
            OrderScheme::Marginal => "marginal",
            OrderScheme::Lexicographic => "lex",
            OrderScheme::Rank(_) => "rank",
        }
    }

    /// Comparison under a total order. Marginal is rejected.
    pub fn compare(&self, x: &[f64], y: &[f64]) -> Result<Ordering> {
        match self {
            OrderScheme::Marginal => Err(Error::NotTotal),
            OrderScheme::Lexicographic => lex_compare(x, y),
            OrderScheme::Rank(r) => Ok(r.rank_or_err(x)?.cmp(&r.rank_or_err(y)?)),
        }
    }
}

/// Maximal or minimal element of `set` under a total order; always a member of `set`.
pub fn order_extrema<V: AsRef<[f64]>>(
    set: &[V],
    order: &OrderScheme,
    which: Extremum,
) -> Result<VectorValue> {
    if !order.is_total() {
        return Err(Error::NotTotal);
    }
    let mut best = set.first().ok_or(Error::EmptySet)?.as_ref();
    // Validates the first element too.
    order.compare(best, best)?;
    for v in &set[1..] {
        let v = v.as_ref();
        let ord = order.compare(v, best)?;
        let better = match which {
            Extremum::Sup => ord == Ordering::Greater,
            Extremum::Inf => ord == Ordering::Less,
        };
        if better {
            best = v;
        }
    }
    VectorValue::from_slice(best)
}
