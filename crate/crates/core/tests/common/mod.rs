//! Brute-force oracles shared by the integration tests. They only use the
//! crate's value types and metric, never its solvers.
#![allow(dead_code)]

use morphlat::{Metric, VectorImage, VectorValue};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Calls `visit` with every permutation of `items`.
pub fn for_each_permutation(items: &mut [usize], visit: &mut dyn FnMut(&[usize])) {
    fn go(items: &mut [usize], k: usize, visit: &mut dyn FnMut(&[usize])) {
        if k == items.len() {
            visit(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            go(items, k + 1, visit);
            items.swap(k, i);
        }
    }
    go(items, 0, visit)
}

/// Shortest closed tour by enumeration with the first point fixed.
pub fn optimal_tour_cost(points: &[VectorValue], metric: Metric) -> f64 {
    let n = points.len();
    if n <= 2 {
        return if n == 2 {
            2.0 * metric.distance(points[0].components(), points[1].components())
        } else {
            0.0
        };
    }
    let d = |a: usize, b: usize| metric.distance(points[a].components(), points[b].components());
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best = f64::INFINITY;
    for_each_permutation(&mut rest, &mut |perm| {
        let mut c = d(0, perm[0]) + d(perm[perm.len() - 1], 0);
        for w in perm.windows(2) {
            c += d(w[0], w[1]);
        }
        best = best.min(c);
    });
    best
}

/// Minimum of the summed pixel distances over all bijections between the pixels of `i` and `j`.
pub fn min_matching_cost(i: &VectorImage, j: &VectorImage, metric: Metric) -> f64 {
    let mut perm: Vec<usize> = (0..j.len()).collect();
    let mut best = f64::INFINITY;
    for_each_permutation(&mut perm, &mut |p| {
        let c: f64 = p
            .iter()
            .enumerate()
            .map(|(a, &b)| metric.distance(i.pixel(a), j.pixel(b)))
            .sum();
        best = best.min(c);
    });
    best
}

/// Random image whose channels take `levels` evenly spaced 8-bit values.
pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize, channels: usize, levels: u32) -> VectorImage {
    let data = (0..w * h * channels)
        .map(|_| {
            let l = rng.random_range(0..levels);
            ((l * 255) / (levels - 1).max(1)) as f64 / 255.0
        })
        .collect();
    VectorImage::new(w, h, channels, data).unwrap()
}

/// Random image drawing every pixel from a palette of `k` random 8-bit RGB colors.
pub fn palette_image(rng: &mut ChaCha8Rng, w: usize, h: usize, k: usize) -> VectorImage {
    let palette: Vec<[f64; 3]> = (0..k)
        .map(|_| std::array::from_fn(|_| rng.random_range(0..=255u8) as f64 / 255.0))
        .collect();
    let data = (0..w * h).flat_map(|_| palette[rng.random_range(0..k)]).collect();
    VectorImage::new(w, h, 3, data).unwrap()
}

/// `k` distinct random 8-bit RGB values.
pub fn random_values(rng: &mut ChaCha8Rng, k: usize) -> Vec<VectorValue> {
    let mut out: Vec<VectorValue> = Vec::new();
    while out.len() < k {
        let v = VectorValue::new(
            (0..3)
                .map(|_| rng.random_range(0..=255u8) as f64 / 255.0)
                .collect(),
        )
        .unwrap();
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}
