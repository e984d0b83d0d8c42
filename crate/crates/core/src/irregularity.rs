//! Global irregularity index between an image and an operator's output.
//!
//! `D1` is the sum over pixels of `d(I(x), J(x))`; `W1` is the exact
//! Wasserstein-1 distance between the pixel-value multisets of `I` and `J`
//! (unit mass per pixel); the index is `100 * (D1 - W1) / D1` percent, and
//! 0 when `D1 = 0`. Because the identity pixel matching is one admissible
//! coupling, `W1 <= D1` and the index lies in `[0, 100]`.

use serde::Serialize;

use crate::error::Result;
use crate::image::VectorImage;
use crate::metric::Metric;
use crate::orders::lex_cmp_unchecked;
use crate::transport;

/// `(D1, W1, Phi)` for one image pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Irregularity {
    pub pixelwise_distance: f64,
    pub wasserstein: f64,
    pub phi_percent: f64,
}

/// Sum of pixel-wise distances.
pub fn pixelwise_distance(i: &VectorImage, j: &VectorImage, metric: Metric) -> Result<f64> {
    i.check_same_shape(j)?;
    Ok(i.pixels()
        .zip(j.pixels())
        .map(|(a, b)| metric.distance(a, b))
        .sum())
}

/// Distinct values with their pixel counts, in lexicographic order.
fn histogram(image: &VectorImage) -> Vec<(&[f64], u64)> {
    let mut pixels: Vec<&[f64]> = image.pixels().collect();
    pixels.sort_by(|a, b| lex_cmp_unchecked(a, b));
    let mut out: Vec<(&[f64], u64)> = Vec::new();
    for p in pixels {
        match out.last_mut() {
            Some((v, n)) if *v == p => *n += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// Exact Wasserstein-1 distance between the value distributions of two
/// images of equal size, as an unnormalized total transport cost.
///
/// Mass shared by both histograms stays in place before the solve; with a
/// metric ground cost some optimal plan always does this.
pub fn wasserstein1(i: &VectorImage, j: &VectorImage, metric: Metric) -> Result<f64> {
    i.check_same_shape(j)?;
    let (hi, hj) = (histogram(i), histogram(j));

    let mut sources: Vec<(&[f64], u64)> = Vec::new();
    let mut sinks: Vec<(&[f64], u64)> = Vec::new();
    let (mut a, mut b) = (0, 0);
    while a < hi.len() || b < hj.len() {
        let ord = match (hi.get(a), hj.get(b)) {
            (Some(x), Some(y)) => lex_cmp_unchecked(x.0, y.0),
            (Some(_), None) => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Greater,
        };
        match ord {
            std::cmp::Ordering::Less => {
                sources.push(hi[a]);
                a += 1;
            }
            std::cmp::Ordering::Greater => {
                sinks.push(hj[b]);
                b += 1;
            }
            std::cmp::Ordering::Equal => {
                let (x, y) = (hi[a], hj[b]);
                if x.1 > y.1 {
                    sources.push((x.0, x.1 - y.1));
                } else if y.1 > x.1 {
                    sinks.push((y.0, y.1 - x.1));
                }
                a += 1;
                b += 1;
            }
        }
    }
    transport_cost(&sources, &sinks, metric)
}

fn transport_cost(sources: &[(&[f64], u64)], sinks: &[(&[f64], u64)], metric: Metric) -> Result<f64> {
    if sources.is_empty() && sinks.is_empty() {
        return Ok(0.0);
    }
    let supply: Vec<u64> = sources.iter().map(|s| s.1).collect();
    let demand: Vec<u64> = sinks.iter().map(|s| s.1).collect();
    let costs: Vec<f64> = sources
        .iter()
        .flat_map(|(x, _)| sinks.iter().map(move |(y, _)| metric.distance(x, y)))
        .collect();
    Ok(transport::solve(&supply, &demand, &costs)?.cost)
}

/// `D1`, `W1` and the irregularity percentage of `j` relative to `i`.
pub fn irregularity_index(i: &VectorImage, j: &VectorImage, metric: Metric) -> Result<Irregularity> {
    let d1 = pixelwise_distance(i, j, metric)?;
    let w1 = wasserstein1(i, j, metric)?.min(d1);
    // Written as 1 - W1/D1 so that W1 = 0 gives exactly 100.
    let phi_percent = if d1 > 0.0 {
        (100.0 * (1.0 - w1 / d1)).clamp(0.0, 100.0)
    } else {
        0.0
    };
    Ok(Irregularity {
        pixelwise_distance: d1,
        wasserstein: w1,
        phi_percent,
    })
}
