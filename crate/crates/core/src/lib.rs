//! Vector-valued mathematical morphology under total orders.
//!
//! Dilation, erosion, opening and closing of color images under the
//! lexicographic order, the marginal order, or an explicit rank order
//! derived from a short Hamiltonian tour over the image's distinct values.
//! The [`irregularity`] module scores an operator by comparing the summed
//! pixel-wise displacement with the exact Wasserstein-1 distance between
//! the input and output value distributions.

pub mod error;
pub mod experiment;
pub mod image;
pub mod image_io;
pub mod irregularity;
pub mod metric;
pub mod morphology;
pub mod orders;
pub mod transport;
pub mod tsp_order;
pub mod value;

pub use error::{Error, Result};
pub use image::{SeShape, StructuringElement, VectorImage};
pub use irregularity::{irregularity_index, pixelwise_distance, wasserstein1, Irregularity};
pub use metric::Metric;
pub use morphology::{close_, dilate, erode, open_, Operator};
pub use orders::{lex_compare, marginal_extrema, order_extrema, Extremum, OrderScheme, RankOrder};
pub use tsp_order::{build_tsp_order, Heuristic, Tour, TspOrder};
pub use value::VectorValue;
