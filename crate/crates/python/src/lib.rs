use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use morphlat::experiment::{self, OrderKind};
use morphlat::{
    image_io, irregularity, orders, tsp_order, Metric, Operator, OrderScheme, StructuringElement,
};

fn to_py(err: morphlat::Error) -> PyErr {
    match err {
        morphlat::Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn metric(name: &str) -> PyResult<Metric> {
    name.parse().map_err(to_py)
}

/// Row-major vector-valued image with components in [0, 1].
#[pyclass(name = "VectorImage", module = "morphlat_py", from_py_object)]
#[derive(Clone)]
struct PyVectorImage {
    inner: morphlat::VectorImage,
}

#[pymethods]
impl PyVectorImage {
    #[new]
    fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> PyResult<Self> {
        let inner = morphlat::VectorImage::new(width, height, channels, data).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn channels(&self) -> usize {
        self.inner.channels()
    }

    fn data(&self) -> Vec<f64> {
        self.inner.data().to_vec()
    }

    fn pixel(&self, row: usize, col: usize) -> PyResult<Vec<f64>> {
        if row >= self.inner.height() || col >= self.inner.width() {
            return Err(PyValueError::new_err("pixel index out of range"));
        }
        Ok(self.inner.at(row, col).to_vec())
    }

    /// Distinct pixel values in lexicographic order.
    fn distinct_values(&self) -> Vec<Vec<f64>> {
        image_io::distinct_values(&self.inner)
            .into_iter()
            .map(|v| v.into_inner())
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "VectorImage(width={}, height={}, channels={})",
            self.inner.width(),
            self.inner.height(),
            self.inner.channels()
        )
    }
}

fn scheme(image: &morphlat::VectorImage, order: &str, metric: Metric) -> PyResult<OrderScheme> {
    Ok(match order.parse::<OrderKind>().map_err(to_py)? {
        OrderKind::Lex => OrderScheme::Lexicographic,
        OrderKind::Marginal => OrderScheme::Marginal,
        OrderKind::Tsp => OrderScheme::Rank(tsp_order::build_tsp_order(image, metric).map_err(to_py)?.rank),
    })
}

fn apply(
    op: Operator,
    image: &PyVectorImage,
    se: &str,
    order: &str,
    metric_name: &str,
) -> PyResult<PyVectorImage> {
    let se: StructuringElement = se.parse().map_err(to_py)?;
    let scheme = scheme(&image.inner, order, metric(metric_name)?)?;
    let inner = op.apply(&image.inner, &se, &scheme).map_err(to_py)?;
    Ok(PyVectorImage { inner })
}

/// Dilation; `order` is one of "lex", "tsp" (built from this image) or "marginal".
#[pyfunction]
#[pyo3(signature = (image, se="square:3", order="lex", metric="euclidean"))]
fn dilate(image: &PyVectorImage, se: &str, order: &str, metric: &str) -> PyResult<PyVectorImage> {
    apply(Operator::Dilate, image, se, order, metric)
}

#[pyfunction]
#[pyo3(signature = (image, se="square:3", order="lex", metric="euclidean"))]
fn erode(image: &PyVectorImage, se: &str, order: &str, metric: &str) -> PyResult<PyVectorImage> {
    apply(Operator::Erode, image, se, order, metric)
}

#[pyfunction]
#[pyo3(signature = (image, se="square:3", order="lex", metric="euclidean"))]
fn opening(image: &PyVectorImage, se: &str, order: &str, metric: &str) -> PyResult<PyVectorImage> {
    apply(Operator::Open, image, se, order, metric)
}

#[pyfunction]
#[pyo3(signature = (image, se="square:3", order="lex", metric="euclidean"))]
fn closing(image: &PyVectorImage, se: &str, order: &str, metric: &str) -> PyResult<PyVectorImage> {
    apply(Operator::Close, image, se, order, metric)
}

/// Returns -1, 0 or 1.
#[pyfunction]
fn lex_compare(x: Vec<f64>, y: Vec<f64>) -> PyResult<i8> {
    Ok(orders::lex_compare(&x, &y).map_err(to_py)? as i8)
}

/// Component-wise "sup" or "inf".
#[pyfunction]
fn marginal_extrema(values: Vec<Vec<f64>>, which: &str) -> PyResult<Vec<f64>> {
    let which = match which {
        "sup" => orders::Extremum::Sup,
        "inf" => orders::Extremum::Inf,
        _ => return Err(PyValueError::new_err("which must be 'sup' or 'inf'")),
    };
    Ok(orders::marginal_extrema(&values, which)
        .map_err(to_py)?
        .into_inner())
}

#[pyfunction]
#[pyo3(signature = (values, metric="euclidean"))]
fn total_variation(values: Vec<Vec<f64>>, metric: &str) -> PyResult<f64> {
    tsp_order::total_variation(&values, self::metric(metric)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (values, metric="euclidean"))]
fn path_length(values: Vec<Vec<f64>>, metric: &str) -> PyResult<f64> {
    tsp_order::path_length(&values, self::metric(metric)?).map_err(to_py)
}

/// Dict with `values` (in rank order), `heuristic`, `tour_cost` and `path_length`.
#[pyfunction]
#[pyo3(signature = (image, metric="euclidean"))]
fn build_tsp_order<'py>(
    py: Python<'py>,
    image: &PyVectorImage,
    metric: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let order = tsp_order::build_tsp_order(&image.inner, self::metric(metric)?).map_err(to_py)?;
    let d = PyDict::new(py);
    let values: Vec<Vec<f64>> = order
        .rank
        .values()
        .iter()
        .map(|v| v.components().to_vec())
        .collect();
    d.set_item("values", values)?;
    d.set_item("heuristic", order.heuristic.name())?;
    d.set_item("tour_cost", order.tour_cost)?;
    d.set_item("path_length", order.path_length)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (i, j, metric="euclidean"))]
fn pixelwise_distance(i: &PyVectorImage, j: &PyVectorImage, metric: &str) -> PyResult<f64> {
    irregularity::pixelwise_distance(&i.inner, &j.inner, self::metric(metric)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (i, j, metric="euclidean"))]
fn wasserstein1(i: &PyVectorImage, j: &PyVectorImage, metric: &str) -> PyResult<f64> {
    irregularity::wasserstein1(&i.inner, &j.inner, self::metric(metric)?).map_err(to_py)
}

/// `(d1, w1, phi_percent)`.
#[pyfunction]
#[pyo3(signature = (i, j, metric="euclidean"))]
fn irregularity_index(i: &PyVectorImage, j: &PyVectorImage, metric: &str) -> PyResult<(f64, f64, f64)> {
    let r = irregularity::irregularity_index(&i.inner, &j.inner, self::metric(metric)?).map_err(to_py)?;
    Ok((r.pixelwise_distance, r.wasserstein, r.phi_percent))
}

#[pyfunction]
fn load_image(path: &str) -> PyResult<PyVectorImage> {
    Ok(PyVectorImage {
        inner: image_io::load_image(path).map_err(to_py)?,
    })
}

/// Format follows the extension (.png, .ppm, .pgm).
#[pyfunction]
fn save_image(image: &PyVectorImage, path: &str) -> PyResult<()> {
    image_io::save_image_auto(&image.inner, path).map_err(to_py)
}

#[pyfunction]
fn generate_synthetic(seed: u64, width: usize, height: usize, palette: usize) -> PyResult<PyVectorImage> {
    Ok(PyVectorImage {
        inner: experiment::generate_synthetic(seed, width, height, palette).map_err(to_py)?,
    })
}

/// Writes the path-export JSON for "lex" or "tsp" and returns its point count.
#[pyfunction]
#[pyo3(signature = (image, order, path, metric="euclidean"))]
fn export_path(image: &PyVectorImage, order: &str, path: &str, metric: &str) -> PyResult<usize> {
    let m = self::metric(metric)?;
    let scheme = scheme(&image.inner, order, m)?;
    let name = order.parse::<OrderKind>().map_err(to_py)?.name();
    let export = experiment::export_path(&image.inner, &scheme, name, m).map_err(to_py)?;
    export.write(path).map_err(to_py)?;
    Ok(export.points.len())
}

#[pymodule]
fn morphlat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyVectorImage>()?;
    m.add_function(wrap_pyfunction!(dilate, m)?)?;
    m.add_function(wrap_pyfunction!(erode, m)?)?;
    m.add_function(wrap_pyfunction!(opening, m)?)?;
    m.add_function(wrap_pyfunction!(closing, m)?)?;
    m.add_function(wrap_pyfunction!(lex_compare, m)?)?;
    m.add_function(wrap_pyfunction!(marginal_extrema, m)?)?;
    m.add_function(wrap_pyfunction!(total_variation, m)?)?;
    m.add_function(wrap_pyfunction!(path_length, m)?)?;
    m.add_function(wrap_pyfunction!(build_tsp_order, m)?)?;
    m.add_function(wrap_pyfunction!(pixelwise_distance, m)?)?;
    m.add_function(wrap_pyfunction!(wasserstein1, m)?)?;
    m.add_function(wrap_pyfunction!(irregularity_index, m)?)?;
    m.add_function(wrap_pyfunction!(load_image, m)?)?;
    m.add_function(wrap_pyfunction!(save_image, m)?)?;
    m.add_function(wrap_pyfunction!(generate_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(export_path, m)?)?;
    Ok(())
}
