//! Flat dilation, erosion, opening and closing of vector-valued images.
//!
//! Windows are truncated at the image border: the dilation at `p` takes the
//! supremum of `I(p - s)` over the offsets `s` with `p - s` inside the
//! domain, and the erosion the infimum of `I(p + s)` over `p + s` inside the
//! domain. Under a total order the pixels are first replaced by their ranks
//! so the window scan only compares integers.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{StructuringElement, VectorImage};
use crate::orders::{lex_cmp_unchecked, Extremum, OrderScheme};

/// The four operators of the experiment protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operator {
    Dilate,
    Erode,
    Open,
    Close,
}

impl Operator {
    pub const ALL: [Operator; 4] = [Operator::Dilate, Operator::Erode, Operator::Open, Operator::Close];

    pub fn name(self) -> &'static str {
        match self {
            Operator::Dilate => "dilate",
            Operator::Erode => "erode",
            Operator::Open => "open",
            Operator::Close => "close",
        }
    }

    pub fn apply(
        self,
        image: &VectorImage,
        se: &StructuringElement,
        order: &OrderScheme,
    ) -> Result<VectorImage> {
        match self {
            Operator::Dilate => dilate(image, se, order),
            Operator::Erode => erode(image, se, order),
            Operator::Open => open_(image, se, order),
            Operator::Close => close_(image, se, order),
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "dilate" | "dilation" => Ok(Operator::Dilate),
            "erode" | "erosion" => Ok(Operator::Erode),
            "open" | "opening" => Ok(Operator::Open),
            "close" | "closing" => Ok(Operator::Close),
            other => Err(Error::Config(format!("unknown operator {other:?}"))),
        }
    }
}

pub fn dilate(image: &VectorImage, se: &StructuringElement, order: &OrderScheme) -> Result<VectorImage> {
    flat_filter(image, se, order, Extremum::Sup)
}

pub fn erode(image: &VectorImage, se: &StructuringElement, order: &OrderScheme) -> Result<VectorImage> {
    flat_filter(image, se, order, Extremum::Inf)
}

/// Erosion followed by dilation with the same element.
pub fn open_(image: &VectorImage, se: &StructuringElement, order: &OrderScheme) -> Result<VectorImage> {
    dilate(&erode(image, se, order)?, se, order)
}

/// Dilation followed by erosion with the same element.
pub fn close_(image: &VectorImage, se: &StructuringElement, order: &OrderScheme) -> Result<VectorImage> {
    erode(&dilate(image, se, order)?, se, order)
}

/// Pixels replaced by their rank under a total order, plus the rank -> value table.
struct Ranked<'a> {
    ranks: Vec<usize>,
    table: Vec<&'a [f64]>,
}

fn rank_pixels<'a>(image: &'a VectorImage, order: &'a OrderScheme) -> Result<Ranked<'a>> {
    match order {
        OrderScheme::Marginal => Err(Error::NotTotal),
        OrderScheme::Lexicographic => {
            let mut table: Vec<&[f64]> = image.pixels().collect();
            table.sort_by(|a, b| lex_cmp_unchecked(a, b));
            table.dedup();
            let ranks = image
                .pixels()
                .map(|p| {
                    table
                        .binary_search_by(|probe| lex_cmp_unchecked(probe, p))
                        .expect("pixel present in its own value table")
                })
                .collect();
            Ok(Ranked { ranks, table })
        }
        OrderScheme::Rank(rank) => {
            if let Some(v) = rank.values().first() {
                crate::value::check_dim(v.dim(), image.channels())?;
            }
            let ranks = image
                .pixels()
                .map(|p| rank.rank_or_err(p))
                .collect::<Result<Vec<_>>>()?;
            let table = rank.values().iter().map(|v| v.components()).collect();
            Ok(Ranked { ranks, table })
        }
    }
}

/// Linear indices of the window of `(row, col)`: `p - s` for sup, `p + s` for inf.
fn window(
    width: usize,
    height: usize,
    offsets: &[(isize, isize)],
    row: usize,
    col: usize,
    which: Extremum,
) -> impl Iterator<Item = usize> + '_ {
    let sign = match which {
        Extremum::Sup => -1,
        Extremum::Inf => 1,
    };
    offsets.iter().filter_map(move |&(dy, dx)| {
        let r = row as isize + sign * dy;
        let c = col as isize + sign * dx;
        if r >= 0 && c >= 0 && (r as usize) < height && (c as usize) < width {
            Some(r as usize * width + c as usize)
        } else {
            None
        }
    })
}

fn flat_filter(
    image: &VectorImage,
    se: &StructuringElement,
    order: &OrderScheme,
    which: Extremum,
) -> Result<VectorImage> {
    let (width, height, channels) = image.shape();
    let offsets = se.offsets();

    let rows: Vec<Vec<f64>> = match order {
        OrderScheme::Marginal => (0..height)
            .into_par_iter()
            .map(|row| {
                let mut out = Vec::with_capacity(width * channels);
                for col in 0..width {
                    let mut acc: Option<Vec<f64>> = None;
                    for q in window(width, height, offsets, row, col, which) {
                        let p = image.pixel(q);
                        match acc.as_mut() {
                            None => acc = Some(p.to_vec()),
                            Some(a) => {
                                for (x, &y) in a.iter_mut().zip(p) {
                                    *x = match which {
                                        Extremum::Sup => x.max(y),
                                        Extremum::Inf => x.min(y),
                                    };
                                }
                            }
                        }
                    }
                    out.extend(acc.ok_or(Error::EmptyWindow { row, col })?);
                }
                Ok(out)
            })
            .collect::<Result<_>>()?,
        _ => {
            let ranked = rank_pixels(image, order)?;
            (0..height)
                .into_par_iter()
                .map(|row| {
                    let mut out = Vec::with_capacity(width * channels);
                    for col in 0..width {
                        let ranks = window(width, height, offsets, row, col, which).map(|q| ranked.ranks[q]);
                        let best = match which {
                            Extremum::Sup => ranks.max(),
                            Extremum::Inf => ranks.min(),
                        };
                        let best = best.ok_or(Error::EmptyWindow { row, col })?;
                        out.extend_from_slice(ranked.table[best]);
                    }
                    Ok(out)
                })
                .collect::<Result<_>>()?
        }
    };
    VectorImage::new(width, height, channels, rows.concat())
}
