//! Total order from a short Hamiltonian tour over the distinct image values.
//!
//! Two construction heuristics are run over `V(I)`: nearest neighbour from
//! the lexicographically smallest value and farthest insertion. The cheaper
//! cyclic tour is cut at its longest edge, oriented so the endpoint with the
//! smaller Euclidean norm comes first, and list positions become ranks.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::VectorImage;
use crate::image_io::distinct_values;
use crate::metric::Metric;
use crate::orders::{lex_cmp_unchecked, RankOrder};
use crate::value::{check_dim, VectorValue};

/// A cyclic visiting sequence of distinct values and its closed length.
#[derive(Clone, Debug, PartialEq)]
pub struct Tour {
    pub sequence: Vec<VectorValue>,
    pub cost: f64,
}

impl Tour {
    pub fn new(sequence: Vec<VectorValue>, metric: Metric) -> Result<Self> {
        let cost = total_variation(&sequence, metric)?;
        Ok(Self { sequence, cost })
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Heuristic {
    NearestNeighbor,
    FarthestInsertion,
}

impl Heuristic {
    pub fn name(self) -> &'static str {
        match self {
            Heuristic::NearestNeighbor => "nearest_neighbor",
            Heuristic::FarthestInsertion => "farthest_insertion",
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Relative tolerance under which two lengths count as tied.
const TIE_EPS: f64 = 1e-12;

/// `a` beats `b` by more than rounding noise.
fn clearly_less(a: f64, b: f64) -> bool {
    a < b - TIE_EPS * a.abs().max(b.abs()).max(1.0)
}

fn tied(a: f64, b: f64) -> bool {
    !clearly_less(a, b) && !clearly_less(b, a)
}

fn check_list<V: AsRef<[f64]>>(list: &[V]) -> Result<()> {
    let first = list.first().ok_or(Error::EmptySet)?.as_ref();
    for v in list {
        check_dim(first.len(), v.as_ref().len())?;
    }
    Ok(())
}

/// Open path length: the sum of consecutive distances.
pub fn path_length<V: AsRef<[f64]>>(list: &[V], metric: Metric) -> Result<f64> {
    check_list(list)?;
    Ok(list
        .windows(2)
        .map(|w| metric.distance(w[0].as_ref(), w[1].as_ref()))
        .sum())
}

/// Cyclic length: the open path plus the closing edge from the last value back to the first.
pub fn total_variation<V: AsRef<[f64]>>(list: &[V], metric: Metric) -> Result<f64> {
    let open = path_length(list, metric)?;
    let closing = metric.distance(list[list.len() - 1].as_ref(), list[0].as_ref());
    Ok(open + closing)
}

struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    fn new(values: &[VectorValue], metric: Metric) -> Self {
        let n = values.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let x = metric.distance(values[i].components(), values[j].components());
                d[i * n + j] = x;
                d[j * n + i] = x;
            }
        }
        Self { n, d }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }
}

fn check_distinct(values: &[VectorValue]) -> Result<()> {
    check_list(values)?;
    let mut sorted: Vec<&VectorValue> = values.iter().collect();
    sorted.sort_by(|a, b| lex_cmp_unchecked(a.components(), b.components()));
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidImage(format!(
            "tour input contains duplicate value {:?}",
            w[0].components()
        )));
    }
    Ok(())
}

fn lex(values: &[VectorValue], a: usize, b: usize) -> Ordering {
    lex_cmp_unchecked(values[a].components(), values[b].components())
}

/// Greedy tour: from `start`, repeatedly move to the closest unvisited value.
///
/// Equally close candidates are resolved towards the lexicographically smaller value.
pub fn nearest_neighbor_tour(values: &[VectorValue], metric: Metric, start: usize) -> Result<Tour> {
    check_distinct(values)?;
    let n = values.len();
    if start >= n {
        return Err(Error::Config(format!(
            "start index {start} out of range for {n} values"
        )));
    }
    let dist = DistanceMatrix::new(values, metric);
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut current = start;
    visited[current] = true;
    order.push(current);
    for _ in 1..n {
        let mut best: Option<usize> = None;
        for cand in (0..n).filter(|&c| !visited[c]) {
            best = match best {
                None => Some(cand),
                Some(b) => {
                    let (dc, db) = (dist.get(current, cand), dist.get(current, b));
                    if clearly_less(dc, db) || (tied(dc, db) && lex(values, cand, b) == Ordering::Less) {
                        Some(cand)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        current = best.expect("an unvisited value remains");
        visited[current] = true;
        order.push(current);
    }
    Tour::new(order.into_iter().map(|i| values[i].clone()).collect(), metric)
}

/// Farthest insertion: seed with the two mutually farthest values, then
/// repeatedly insert the value farthest from the partial tour at the slot of
/// least cost increase.
///
/// Ties go to the lexicographically smaller value (pairs compared by their
/// smaller then larger member) and to the earliest slot.
pub fn farthest_insertion_tour(values: &[VectorValue], metric: Metric) -> Result<Tour> {
    check_distinct(values)?;
    let n = values.len();
    if n <= 2 {
        let mut seq = values.to_vec();
        seq.sort_by(|a, b| lex_cmp_unchecked(a.components(), b.components()));
        return Tour::new(seq, metric);
    }
    let dist = DistanceMatrix::new(values, metric);

    let ordered_pair = |i: usize, j: usize| {
        if lex(values, i, j) == Ordering::Less {
            (i, j)
        } else {
            (j, i)
        }
    };
    let mut seed = ordered_pair(0, 1);
    for i in 0..n {
        for j in i + 1..n {
            let cand = ordered_pair(i, j);
            let (dc, ds) = (dist.get(i, j), dist.get(seed.0, seed.1));
            let pair_lex = lex(values, cand.0, seed.0).then_with(|| lex(values, cand.1, seed.1));
            if clearly_less(ds, dc) || (tied(dc, ds) && pair_lex == Ordering::Less) {
                seed = cand;
            }
        }
    }

    let mut tour = vec![seed.0, seed.1];
    let mut in_tour = vec![false; n];
    in_tour[seed.0] = true;
    in_tour[seed.1] = true;
    // Distance from each value to the nearest tour member.
    let mut gap: Vec<f64> = (0..n)
        .map(|v| dist.get(v, seed.0).min(dist.get(v, seed.1)))
        .collect();

    while tour.len() < n {
        let mut pick: Option<usize> = None;
        for v in (0..n).filter(|&v| !in_tour[v]) {
            pick = match pick {
                None => Some(v),
                Some(p)
                    if clearly_less(gap[p], gap[v])
                        || (tied(gap[v], gap[p]) && lex(values, v, p) == Ordering::Less) =>
                {
                    Some(v)
                }
                keep => keep,
            };
        }
        let v = pick.expect("an unrouted value remains");

        let len = tour.len();
        let mut best_slot = 0;
        let mut best_increase = f64::INFINITY;
        for slot in 0..len {
            let (a, b) = (tour[slot], tour[(slot + 1) % len]);
            let increase = dist.get(a, v) + dist.get(v, b) - dist.get(a, b);
            if best_increase.is_infinite() || clearly_less(increase, best_increase) {
                best_increase = increase;
                best_slot = slot;
            }
        }
        tour.insert(best_slot + 1, v);
        in_tour[v] = true;
        for (u, g) in gap.iter_mut().enumerate() {
            *g = g.min(dist.get(u, v));
        }
    }
    Tour::new(tour.into_iter().map(|i| values[i].clone()).collect(), metric)
}

/// Opens a cyclic tour at its longest edge and orients it by endpoint norm.
///
/// The first longest edge in sequence order becomes the removed closing
/// edge. The list is then reversed if its first value has a larger
/// Euclidean norm than its last; equal norms keep the rotation's orientation.
pub fn cut_tour(tour: &Tour, metric: Metric) -> Vec<VectorValue> {
    let seq = &tour.sequence;
    let n = seq.len();
    if n <= 1 {
        return seq.clone();
    }
    let mut cut = 0;
    let mut longest = f64::NEG_INFINITY;
    for i in 0..n {
        let d = metric.distance(seq[i].components(), seq[(i + 1) % n].components());
        if longest.is_infinite() || clearly_less(longest, d) {
            longest = d;
            cut = i;
        }
    }
    let mut list: Vec<VectorValue> = (0..n).map(|k| seq[(cut + 1 + k) % n].clone()).collect();
    if list[0].norm() > list[n - 1].norm() {
        list.reverse();
    }
    list
}

/// Result of building the tour-derived order for one image.
#[derive(Clone, Debug)]
pub struct TspOrder {
    pub rank: RankOrder,
    pub heuristic: Heuristic,
    /// Closed length of the winning tour.
    pub tour_cost: f64,
    /// Open length of the ranked list.
    pub path_length: f64,
    pub nearest_neighbor_cost: f64,
    pub farthest_insertion_cost: f64,
}

/// Runs both heuristics on `V(I)`, keeps the shorter closed tour (nearest
/// neighbour on a tie), cuts it and ranks values by list position.
pub fn build_tsp_order(image: &VectorImage, metric: Metric) -> Result<TspOrder> {
    let values = distinct_values(image);
    build_tsp_order_from_values(&values, metric)
}

/// As [`build_tsp_order`], for a set of distinct values in any enumeration order.
pub fn build_tsp_order_from_values(values: &[VectorValue], metric: Metric) -> Result<TspOrder> {
    check_distinct(values)?;
    let start = (0..values.len())
        .min_by(|&a, &b| lex(values, a, b))
        .expect("non-empty");
    let (nn, fi) = rayon::join(
        || nearest_neighbor_tour(values, metric, start),
        || farthest_insertion_tour(values, metric),
    );
    let (nn, fi) = (nn?, fi?);
    let (nearest_neighbor_cost, farthest_insertion_cost) = (nn.cost, fi.cost);
    let (tour, heuristic) = if clearly_less(fi.cost, nn.cost) {
        (fi, Heuristic::FarthestInsertion)
    } else {
        (nn, Heuristic::NearestNeighbor)
    };
    let list = cut_tour(&tour, metric);
    let path_length = path_length(&list, metric)?;
    Ok(TspOrder {
        rank: RankOrder::from_values(list)?,
        heuristic,
        tour_cost: tour.cost,
        path_length,
        nearest_neighbor_cost,
        farthest_insertion_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vals(points: &[&[f64]]) -> Vec<VectorValue> {
        points
            .iter()
            .map(|p| VectorValue::from_slice(p).unwrap())
            .collect()
    }

    fn scalars(list: &[VectorValue]) -> Vec<f64> {
        list.iter().map(|v| v.components()[0]).collect()
    }

    #[test]
    fn total_variation_examples() {
        let e = Metric::Euclidean;
        assert_eq!(total_variation(&vals(&[&[0.0, 0.0, 0.0]]), e).unwrap(), 0.0);
        let pair = vals(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]);
        assert_eq!(total_variation(&pair, e).unwrap(), 2.0);
        assert_eq!(path_length(&pair, e).unwrap(), 1.0);
        let square = vals(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]);
        assert_eq!(total_variation(&square, e).unwrap(), 4.0);
        assert_eq!(path_length(&square, e).unwrap(), 3.0);
    }

    #[test]
    fn empty_and_mixed_lists_rejected() {
        let empty: Vec<VectorValue> = Vec::new();
        assert!(total_variation(&empty, Metric::Euclidean).is_err());
        let mixed = vals(&[&[0.0], &[0.0, 1.0]]);
        assert!(path_length(&mixed, Metric::Euclidean).is_err());
    }

    #[test]
    fn nearest_neighbor_examples() {
        let single = nearest_neighbor_tour(&vals(&[&[0.0, 0.0]]), Metric::Euclidean, 0).unwrap();
        assert_eq!(single.cost, 0.0);
        assert_eq!(single.len(), 1);

        let line = vals(&[&[0.5], &[0.0], &[0.1]]);
        let t = nearest_neighbor_tour(&line, Metric::Euclidean, 1).unwrap();
        assert_eq!(scalars(&t.sequence), vec![0.0, 0.1, 0.5]);
        assert!((t.cost - 1.0).abs() < 1e-15);
        assert!(nearest_neighbor_tour(&line, Metric::Euclidean, 3).is_err());
    }

    #[test]
    fn nearest_neighbor_tie_prefers_lex_smaller() {
        // From 0.5 both 0.25 and 0.75 are equally close.
        let line = vals(&[&[0.75], &[0.5], &[0.25]]);
        let t = nearest_neighbor_tour(&line, Metric::Euclidean, 1).unwrap();
        assert_eq!(scalars(&t.sequence), vec![0.5, 0.25, 0.75]);
    }

    #[test]
    fn duplicates_rejected() {
        let dup = vals(&[&[0.1], &[0.1]]);
        assert!(nearest_neighbor_tour(&dup, Metric::Euclidean, 0).is_err());
        assert!(farthest_insertion_tour(&dup, Metric::Euclidean).is_err());
    }

    #[test]
    fn farthest_insertion_small_and_square() {
        let two = vals(&[&[0.9], &[0.1]]);
        let t = farthest_insertion_tour(&two, Metric::Euclidean).unwrap();
        assert_eq!(scalars(&t.sequence), vec![0.1, 0.9]);
        assert!((t.cost - 1.6).abs() < 1e-15);

        let corners = vals(&[&[0.0, 0.0], &[1.0, 1.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let t = farthest_insertion_tour(&corners, Metric::Euclidean).unwrap();
        assert!((t.cost - 4.0).abs() < 1e-12, "cost {}", t.cost);
    }

    #[test]
    fn cut_tour_opens_at_longest_edge() {
        let t = Tour::new(vals(&[&[0.1], &[0.9], &[0.0]]), Metric::Euclidean).unwrap();
        let list = cut_tour(&t, Metric::Euclidean);
        assert_eq!(scalars(&list), vec![0.0, 0.1, 0.9]);

        let single = Tour::new(vals(&[&[0.3, 0.3]]), Metric::Euclidean).unwrap();
        assert_eq!(cut_tour(&single, Metric::Euclidean), single.sequence);
    }

    #[test]
    fn cut_tour_keeps_rotation_on_equal_norms() {
        // Cycle (1,0) -> (0,1) -> (0.5,0.5): longest edge is the first one.
        let t = Tour::new(vals(&[&[1.0, 0.0], &[0.0, 1.0], &[0.5, 0.5]]), Metric::Euclidean).unwrap();
        let list = cut_tour(&t, Metric::Euclidean);
        assert_eq!(list, vals(&[&[0.0, 1.0], &[0.5, 0.5], &[1.0, 0.0]]));
    }

    #[test]
    fn colinear_values_rank_in_scalar_order() {
        let pts: Vec<Vec<f64>> = [0.8, 0.1, 0.45, 0.3, 0.95]
            .iter()
            .map(|&t| vec![t, t * 0.5, 0.2 + 0.5 * t])
            .collect();
        let values: Vec<VectorValue> = pts.iter().map(|p| VectorValue::from_slice(p).unwrap()).collect();
        let order = build_tsp_order_from_values(&values, Metric::Euclidean).unwrap();
        let firsts = scalars(order.rank.values());
        assert_eq!(firsts, vec![0.1, 0.3, 0.45, 0.8, 0.95]);
    }

    #[test]
    fn constant_image_gives_single_rank() {
        let img = VectorImage::constant(4, 4, &[0.2, 0.2, 0.2]).unwrap();
        let order = build_tsp_order(&img, Metric::Euclidean).unwrap();
        assert_eq!(order.rank.len(), 1);
        assert_eq!(order.tour_cost, 0.0);
        assert_eq!(order.path_length, 0.0);
    }
}
