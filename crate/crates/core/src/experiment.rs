//! Experiment harness: every (image, order, operator) triple is run and
//! scored by its irregularity against the input image and by the length of
//! the order's value path.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{SeShape, StructuringElement, VectorImage};
use crate::image_io::{self, distinct_values, ImageFileFormat};
use crate::irregularity::irregularity_index;
use crate::metric::Metric;
use crate::morphology::Operator;
use crate::orders::OrderScheme;
use crate::tsp_order::{build_tsp_order, path_length, total_variation};
use crate::value::VectorValue;

/// CSV header, in column order.
pub const CSV_COLUMNS: [&str; 12] = [
    "image",
    "operator",
    "order",
    "phi_percent",
    "d1",
    "w1",
    "path_length",
    "tour_cost",
    "heuristic",
    "se",
    "metric",
    "wall_ms",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OrderKind {
    Tsp,
    Lex,
    Marginal,
}

impl OrderKind {
    pub fn name(self) -> &'static str {
        match self {
            OrderKind::Tsp => "tsp",
            OrderKind::Lex => "lex",
            OrderKind::Marginal => "marginal",
        }
    }
}

impl fmt::Display for OrderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OrderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "tsp" => Ok(OrderKind::Tsp),
            "lex" | "lexicographic" => Ok(OrderKind::Lex),
            "marginal" => Ok(OrderKind::Marginal),
            other => Err(Error::Config(format!("unknown order {other:?}"))),
        }
    }
}

/// Synthetic inputs used when no image paths are given.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub count: usize,
    pub width: usize,
    pub height: usize,
    pub palette: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            count: 20,
            width: 16,
            height: 16,
            palette: 64,
        }
    }
}

/// A validated experiment configuration.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub inputs: Vec<PathBuf>,
    pub operators: Vec<Operator>,
    pub orders: Vec<OrderKind>,
    pub se: StructuringElement,
    pub metric: Metric,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
    pub synthetic: SyntheticSpec,
    pub emit_images: bool,
    pub emit_paths: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            operators: Operator::ALL.to_vec(),
            orders: vec![OrderKind::Tsp, OrderKind::Lex],
            se: StructuringElement::square(3).expect("valid default"),
            metric: Metric::Euclidean,
            out_dir: None,
            seed: 0,
            synthetic: SyntheticSpec::default(),
            emit_images: false,
            emit_paths: false,
        }
    }
}

/// On-disk JSON configuration. Every field is optional.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub inputs: Option<Vec<PathBuf>>,
    pub operators: Option<Vec<String>>,
    pub orders: Option<Vec<String>>,
    /// Shorthand such as `"square:3"`; overrides `se_shape`/`se_size`.
    pub se: Option<String>,
    pub se_shape: Option<String>,
    pub se_size: Option<usize>,
    pub metric: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub synthetic: Option<SyntheticSpec>,
    pub emit_images: Option<bool>,
    pub emit_paths: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.as_ref().display())))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merge(self, other: ConfigFile) -> ConfigFile {
        ConfigFile {
            inputs: other.inputs.or(self.inputs),
            operators: other.operators.or(self.operators),
            orders: other.orders.or(self.orders),
            se: other.se.or(self.se),
            se_shape: other.se_shape.or(self.se_shape),
            se_size: other.se_size.or(self.se_size),
            metric: other.metric.or(self.metric),
            out: other.out.or(self.out),
            seed: other.seed.or(self.seed),
            synthetic: other.synthetic.or(self.synthetic),
            emit_images: other.emit_images.or(self.emit_images),
            emit_paths: other.emit_paths.or(self.emit_paths),
        }
    }

    pub fn resolve(self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::default();
        if let Some(inputs) = self.inputs {
            config.inputs = inputs;
        }
        if let Some(ops) = self.operators {
            config.operators = parse_unique(&ops)?;
        }
        if let Some(orders) = self.orders {
            config.orders = parse_unique(&orders)?;
        }
        if config.operators.is_empty() {
            return Err(Error::Config("operator list is empty".into()));
        }
        if config.orders.is_empty() {
            return Err(Error::Config("order list is empty".into()));
        }
        config.se = match (self.se, self.se_shape, self.se_size) {
            (Some(se), _, _) => se.parse()?,
            (None, shape, size) => {
                let shape = match shape.as_deref().unwrap_or("square") {
                    "square" => SeShape::Square,
                    "cross" => SeShape::Cross,
                    other => return Err(Error::Config(format!("unknown se_shape {other:?}"))),
                };
                StructuringElement::shaped(shape, size.unwrap_or(3))?
            }
        };
        if let Some(m) = self.metric {
            config.metric = m.parse()?;
        }
        config.out_dir = self.out;
        config.seed = self.seed.unwrap_or(0);
        if let Some(s) = self.synthetic {
            if s.count == 0 || s.width == 0 || s.height == 0 || s.palette == 0 {
                return Err(Error::Config("synthetic fields must be positive".into()));
            }
            config.synthetic = s;
        }
        config.emit_images = self.emit_images.unwrap_or(false);
        config.emit_paths = self.emit_paths.unwrap_or(false);
        Ok(config)
    }
}

fn parse_unique<T: FromStr<Err = Error> + PartialEq>(items: &[String]) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for s in items
        .iter()
        .flat_map(|s| s.split(','))
        .filter(|s| !s.trim().is_empty())
    {
        let v: T = s.parse()?;
        if !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

/// One line of the report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub image: String,
    pub operator: String,
    pub order: String,
    pub phi_percent: f64,
    pub d1: f64,
    pub w1: f64,
    /// Open path over the order's value list; empty for the marginal order.
    pub path_length: Option<f64>,
    /// Closed tour over the same list.
    pub tour_cost: Option<f64>,
    pub heuristic: String,
    pub se: String,
    pub metric: String,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowError {
    pub image: String,
    pub operator: Option<String>,
    pub order: Option<String>,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OrderSummary {
    pub order: String,
    pub rows: usize,
    pub mean_phi_percent: f64,
    pub mean_path_length: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub per_order: Vec<OrderSummary>,
    /// Images where both tsp and lex ran.
    pub paired_images: usize,
    /// Images whose tsp path is strictly shorter than the lex path.
    pub tsp_shorter_images: usize,
    /// `(image, operator)` pairs with a higher tsp index than lex.
    pub tsp_more_irregular: Vec<(String, String)>,
    /// Images where the tsp tour is longer than the closed lex tour.
    pub heuristic_regressions: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<ResultRow>,
    pub errors: Vec<RowError>,
    pub summary: Summary,
}

impl ExperimentReport {
    pub fn has_errors(&self) -> bool {
        !self.errors.is_empty()
    }
}

/// Value path of a total order as written for plotting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathExport {
    pub order_name: String,
    pub metric: String,
    pub points: Vec<Vec<f64>>,
    pub path_length: f64,
    pub tour_cost: f64,
}

impl PathExport {
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n")?;
        Ok(())
    }
}

/// The values of `V(I)` listed by increasing rank under a total order.
pub fn export_path(
    image: &VectorImage,
    order: &OrderScheme,
    order_name: &str,
    metric: Metric,
) -> Result<PathExport> {
    let values = distinct_values(image);
    let points: Vec<VectorValue> = match order {
        OrderScheme::Marginal => return Err(Error::NotTotal),
        OrderScheme::Lexicographic => values,
        OrderScheme::Rank(rank) => {
            let mut ranked = values
                .into_iter()
                .map(|v| Ok((rank.rank_or_err(v.components())?, v)))
                .collect::<Result<Vec<_>>>()?;
            ranked.sort_by_key(|(r, _)| *r);
            ranked.into_iter().map(|(_, v)| v).collect()
        }
    };
    Ok(PathExport {
        order_name: order_name.to_string(),
        metric: metric.name().to_string(),
        path_length: path_length(&points, metric)?,
        tour_cost: total_variation(&points, metric)?,
        points: points.into_iter().map(VectorValue::into_inner).collect(),
    })
}

/// Deterministic RGB test image with smooth low-frequency structure and at
/// most `palette_size` distinct colors.
///
/// Each channel is a sum of three random plane waves plus a little noise.
/// The palette is sampled from that field at random pixels (8-bit
/// quantized) and every pixel takes its nearest palette color.
pub fn generate_synthetic(
    seed: u64,
    width: usize,
    height: usize,
    palette_size: usize,
) -> Result<VectorImage> {
    if palette_size == 0 {
        return Err(Error::Config("palette size must be at least 1".into()));
    }
    if width == 0 || height == 0 {
        return Err(Error::Config("image size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = std::f64::consts::TAU;
    let mut field = vec![0.0; width * height * 3];
    for c in 0..3 {
        let waves: Vec<(f64, f64, f64, f64)> = (0..3)
            .map(|_| {
                (
                    rng.random_range(0.08..0.22),
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                    rng.random_range(0.0..tau),
                )
            })
            .collect();
        let base = rng.random_range(0.3..0.7);
        for y in 0..height {
            for x in 0..width {
                let (u, v) = (x as f64 / width as f64, y as f64 / height as f64);
                let mut s = base;
                for &(amp, fx, fy, phase) in &waves {
                    s += amp * (tau * (fx * u + fy * v) + phase).sin();
                }
                s += rng.random_range(-0.03..0.03);
                field[(y * width + x) * 3 + c] = s.clamp(0.0, 1.0);
            }
        }
    }
    let quantize = |v: f64| image_io::byte_to_unit(image_io::unit_to_byte(v));
    let n = width * height;
    let palette: Vec<[f64; 3]> = (0..palette_size)
        .map(|_| {
            let p = rng.random_range(0..n);
            [
                quantize(field[3 * p]),
                quantize(field[3 * p + 1]),
                quantize(field[3 * p + 2]),
            ]
        })
        .collect();
    let mut data = Vec::with_capacity(n * 3);
    for p in field.chunks_exact(3) {
        let nearest = palette
            .iter()
            .min_by(|a, b| {
                Metric::Euclidean
                    .distance(&a[..], p)
                    .total_cmp(&Metric::Euclidean.distance(&b[..], p))
            })
            .expect("palette is non-empty");
        data.extend_from_slice(nearest);
    }
    VectorImage::new(width, height, 3, data)
}

enum Source {
    File(PathBuf),
    Synthetic(u64),
}

struct Input {
    id: String,
    source: Source,
}

fn inputs(config: &ExperimentConfig) -> Vec<Input> {
    if config.inputs.is_empty() {
        (0..config.synthetic.count)
            .map(|i| Input {
                id: format!("synth_{i:04}"),
                source: Source::Synthetic(config.seed.wrapping_add(i as u64)),
            })
            .collect()
    } else {
        config
            .inputs
            .iter()
            .map(|p| Input {
                id: p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| p.display().to_string()),
                source: Source::File(p.clone()),
            })
            .collect()
    }
}

/// An order prepared for one image.
struct PreparedOrder {
    kind: OrderKind,
    scheme: OrderScheme,
    heuristic: String,
    path_length: Option<f64>,
    tour_cost: Option<f64>,
}

fn prepare_order(image: &VectorImage, kind: OrderKind, metric: Metric) -> Result<PreparedOrder> {
    Ok(match kind {
        OrderKind::Tsp => {
            let tsp = build_tsp_order(image, metric)?;
            PreparedOrder {
                kind,
                heuristic: tsp.heuristic.name().to_string(),
                path_length: Some(tsp.path_length),
                tour_cost: Some(tsp.tour_cost),
                scheme: OrderScheme::Rank(tsp.rank),
            }
        }
        OrderKind::Lex => {
            let values = distinct_values(image);
            PreparedOrder {
                kind,
                heuristic: "none".into(),
                path_length: Some(path_length(&values, metric)?),
                tour_cost: Some(total_variation(&values, metric)?),
                scheme: OrderScheme::Lexicographic,
            }
        }
        OrderKind::Marginal => PreparedOrder {
            kind,
            heuristic: "none".into(),
            path_length: None,
            tour_cost: None,
            scheme: OrderScheme::Marginal,
        },
    })
}

struct ImageOutcome {
    rows: Vec<(Operator, OrderKind, ResultRow)>,
    errors: Vec<RowError>,
}

fn run_image(config: &ExperimentConfig, input: &Input) -> ImageOutcome {
    let mut outcome = ImageOutcome {
        rows: Vec::new(),
        errors: Vec::new(),
    };
    let image = match &input.source {
        Source::File(p) => image_io::load_image(p),
        Source::Synthetic(seed) => generate_synthetic(
            *seed,
            config.synthetic.width,
            config.synthetic.height,
            config.synthetic.palette,
        ),
    };
    let image = match image {
        Ok(img) => img,
        Err(e) => {
            outcome.errors.push(RowError {
                image: input.id.clone(),
                operator: None,
                order: None,
                message: e.to_string(),
            });
            return outcome;
        }
    };

    let mut orders = config.orders.clone();
    orders.sort();
    let mut operators = config.operators.clone();
    operators.sort();

    for kind in orders {
        let prepared = match prepare_order(&image, kind, config.metric) {
            Ok(p) => p,
            Err(e) => {
                outcome.errors.push(RowError {
                    image: input.id.clone(),
                    operator: None,
                    order: Some(kind.name().into()),
                    message: e.to_string(),
                });
                continue;
            }
        };
        if config.emit_paths && prepared.scheme.is_total() {
            if let Err(e) = emit_path(config, &input.id, &image, &prepared) {
                outcome.errors.push(RowError {
                    image: input.id.clone(),
                    operator: None,
                    order: Some(kind.name().into()),
                    message: format!("path export: {e}"),
                });
            }
        }
        for &op in &operators {
            match run_row(config, &input.id, &image, &prepared, op) {
                Ok(row) => outcome.rows.push((op, kind, row)),
                Err(e) => outcome.errors.push(RowError {
                    image: input.id.clone(),
                    operator: Some(op.name().into()),
                    order: Some(kind.name().into()),
                    message: e.to_string(),
                }),
            }
        }
    }
    outcome
}

fn emit_path(config: &ExperimentConfig, id: &str, image: &VectorImage, order: &PreparedOrder) -> Result<()> {
    let Some(out) = &config.out_dir else {
        return Ok(());
    };
    let dir = out.join("paths");
    fs::create_dir_all(&dir)?;
    let export = export_path(image, &order.scheme, order.kind.name(), config.metric)?;
    export.write(dir.join(format!("{id}_{}.json", order.kind.name())))
}

fn run_row(
    config: &ExperimentConfig,
    id: &str,
    image: &VectorImage,
    order: &PreparedOrder,
    op: Operator,
) -> Result<ResultRow> {
    let start = Instant::now();
    let output = op.apply(image, &config.se, &order.scheme)?;
    let index = irregularity_index(image, &output, config.metric)?;
    let wall_ms = (start.elapsed().as_secs_f64() * 1e6).round() / 1e3;
    if config.emit_images {
        if let Some(out) = &config.out_dir {
            let dir = out.join("images");
            fs::create_dir_all(&dir)?;
            let name = format!("{id}_{}_{}.png", op.name(), order.kind.name());
            image_io::save_image(&output, dir.join(name), ImageFileFormat::Png)?;
        }
    }
    Ok(ResultRow {
        image: id.to_string(),
        operator: op.name().into(),
        order: order.kind.name().into(),
        phi_percent: index.phi_percent,
        d1: index.pixelwise_distance,
        w1: index.wasserstein,
        path_length: order.path_length,
        tour_cost: order.tour_cost,
        heuristic: order.heuristic.clone(),
        se: config.se.label().to_string(),
        metric: config.metric.name().into(),
        wall_ms,
    })
}

fn summarize(rows: &[ResultRow]) -> Summary {
    let mut summary = Summary::default();
    for kind in [OrderKind::Tsp, OrderKind::Lex, OrderKind::Marginal] {
        let sel: Vec<&ResultRow> = rows.iter().filter(|r| r.order == kind.name()).collect();
        if sel.is_empty() {
            continue;
        }
        let paths: Vec<f64> = sel.iter().filter_map(|r| r.path_length).collect();
        summary.per_order.push(OrderSummary {
            order: kind.name().into(),
            rows: sel.len(),
            mean_phi_percent: sel.iter().map(|r| r.phi_percent).sum::<f64>() / sel.len() as f64,
            mean_path_length: (!paths.is_empty()).then(|| paths.iter().sum::<f64>() / paths.len() as f64),
        });
    }

    let mut images: Vec<&str> = rows.iter().map(|r| r.image.as_str()).collect();
    images.dedup();
    for image in images {
        let find = |order: &str, op: Option<&str>| {
            rows.iter()
                .find(|r| r.image == image && r.order == order && op.is_none_or(|o| r.operator == o))
        };
        let (Some(tsp), Some(lex)) = (find("tsp", None), find("lex", None)) else {
            continue;
        };
        summary.paired_images += 1;
        if tsp.path_length < lex.path_length {
            summary.tsp_shorter_images += 1;
        }
        if tsp.tour_cost > lex.tour_cost {
            summary.heuristic_regressions.push(image.to_string());
        }
        for op in Operator::ALL {
            if let (Some(t), Some(l)) = (find("tsp", Some(op.name())), find("lex", Some(op.name()))) {
                if t.phi_percent > l.phi_percent {
                    summary
                        .tsp_more_irregular
                        .push((image.to_string(), op.name().into()));
                }
            }
        }
    }
    summary
}

/// Runs the full grid and, when an output directory is configured, writes
/// `results.csv`, `results.json` and any requested images and path exports.
///
/// Failures of individual rows are collected in the report rather than
/// aborting the run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.operators.is_empty() || config.orders.is_empty() {
        return Err(Error::Config("operators and orders must be non-empty".into()));
    }
    if let Some(out) = &config.out_dir {
        fs::create_dir_all(out)?;
    }
    let inputs = inputs(config);
    let outcomes: Vec<ImageOutcome> = inputs.par_iter().map(|i| run_image(config, i)).collect();

    let mut keyed = Vec::new();
    let mut errors = Vec::new();
    for o in outcomes {
        keyed.extend(o.rows);
        errors.extend(o.errors);
    }
    keyed.sort_by(|a, b| (&a.2.image, a.0, a.1).cmp(&(&b.2.image, b.0, b.1)));
    let rows: Vec<ResultRow> = keyed.into_iter().map(|(_, _, r)| r).collect();
    let summary = summarize(&rows);
    let report = ExperimentReport {
        rows,
        errors,
        summary,
    };
    if let Some(out) = &config.out_dir {
        write_csv(&report.rows, out.join("results.csv"))?;
        write_json(config, &report, out.join("results.json"))?;
    }
    Ok(report)
}

pub fn write_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(config: &ExperimentConfig, report: &ExperimentReport, path: impl AsRef<Path>) -> Result<()> {
    let meta = serde_json::json!({
        "conventions": {
            "values": "8-bit channels mapped to [0,1] as byte/255",
            "phi_percent": "100 * (d1 - w1) / d1, 0 when d1 = 0",
            "d1": "sum over pixels of metric distance between input and output",
            "w1": "exact Wasserstein-1 between pixel-value multisets, unit mass per pixel",
            "path_length": "open path over the ranked distinct values",
            "tour_cost": "closed tour over the same list",
            "boundary": "windows truncated at the image border",
        },
        "se": config.se.label(),
        "metric": config.metric.name(),
        "operators": config.operators.iter().map(|o| o.name()).collect::<Vec<_>>(),
        "orders": config.orders.iter().map(|o| o.name()).collect::<Vec<_>>(),
        "seed": config.seed,
        "inputs": config.inputs,
        "synthetic": if config.inputs.is_empty() { Some(config.synthetic) } else { None },
    });
    let doc = serde_json::json!({
        "meta": meta,
        "rows": report.rows,
        "errors": report.errors,
        "summary": report.summary,
    });
    fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(())
}
