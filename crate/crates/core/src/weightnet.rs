//! Weights files and the layered neuron graph.
//!
//! Neurons are numbered from the output layer backwards: the output neurons
//! get `0..output_size`, the last hidden layer follows, and the input layer
//! receives the highest indices. Every forward edge therefore points from a
//! higher index to a lower one.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum WeightsError {
    #[error("malformed weights file: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("unsupported format_version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("weights file has no layers")]
    NoLayers,
    #[error("layer {layer}: rows and cols must be at least 1 (got {rows}x{cols})")]
    EmptyLayer {
        layer: usize,
        rows: usize,
        cols: usize,
    },
    #[error("layer {layer}: declared {expected} rows but weights has {found}")]
    RowCount {
        layer: usize,
        expected: usize,
        found: usize,
    },
    #[error("layer {layer}, row {row}: declared {expected} cols but row has {found}")]
    ColCount {
        layer: usize,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("layer {layer}, entry ({row},{col}): weight {value} is not finite")]
    NonFinite {
        layer: usize,
        row: usize,
        col: usize,
        value: f64,
    },
    #[error("shape mismatch: layer {layer} has {cols} cols but layer {next} has {rows} rows")]
    ShapeMismatch {
        layer: usize,
        cols: usize,
        next: usize,
        rows: usize,
    },
    #[error("output_size {output_size} does not match last layer cols {cols}")]
    OutputSize { output_size: usize, cols: usize },
    #[error("used output {index} is outside 0..{output_size}")]
    UsedOutput { index: usize, output_size: usize },
}

/// Dense weight block between two adjacent neuron layers.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerMatrix {
    rows: usize,
    cols: usize,
    /// Row-major; entry `(i, j)` is the weight from source `i` to destination `j`.
    weights: Vec<f64>,
}

impl LayerMatrix {
    pub fn new(rows: usize, cols: usize, weights: Vec<f64>) -> Result<Self, WeightsError> {
        Self::checked(0, rows, cols, weights)
    }

    fn checked(
        layer: usize,
        rows: usize,
        cols: usize,
        weights: Vec<f64>,
    ) -> Result<Self, WeightsError> {
        if rows == 0 || cols == 0 {
            return Err(WeightsError::EmptyLayer { layer, rows, cols });
        }
        if weights.len() != rows * cols {
            return Err(WeightsError::RowCount {
                layer,
                expected: rows,
                found: weights.len() / cols,
            });
        }
        if let Some(pos) = weights.iter().position(|w| !w.is_finite()) {
            return Err(WeightsError::NonFinite {
                layer,
                row: pos / cols,
                col: pos % cols,
                value: weights[pos],
            });
        }
        Ok(Self {
            rows,
            cols,
            weights,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.weights[row * self.cols..(row + 1) * self.cols]
    }

    /// Multiplies every weight by `factor`.
    pub fn scale(&mut self, factor: f64) {
        self.weights.iter_mut().for_each(|w| *w *= factor);
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }
}

/// A fully connected network as read from a weights file.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    pub name: String,
    pub output_size: usize,
    pub used_outputs: BTreeSet<usize>,
    /// Ordered from the input side to the output side.
    pub layers: Vec<LayerMatrix>,
}

#[derive(Serialize, Deserialize)]
struct LayerJson {
    rows: usize,
    cols: usize,
    weights: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    format_version: u32,
    name: String,
    output_size: usize,
    used_outputs: Vec<usize>,
    layers: Vec<LayerJson>,
}

impl NetworkModel {
    pub fn new(
        name: impl Into<String>,
        layers: Vec<LayerMatrix>,
        output_size: usize,
        used_outputs: impl IntoIterator<Item = usize>,
    ) -> Result<Self, WeightsError> {
        let model = Self {
            name: name.into(),
            output_size,
            used_outputs: used_outputs.into_iter().collect(),
            layers,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), WeightsError> {
        let last = self.layers.last().ok_or(WeightsError::NoLayers)?;
        for (k, pair) in self.layers.windows(2).enumerate() {
            if pair[0].cols != pair[1].rows {
                return Err(WeightsError::ShapeMismatch {
                    layer: k,
                    cols: pair[0].cols,
                    next: k + 1,
                    rows: pair[1].rows,
                });
            }
        }
        if self.output_size != last.cols {
            return Err(WeightsError::OutputSize {
                output_size: self.output_size,
                cols: last.cols,
            });
        }
        if let Some(&index) = self.used_outputs.iter().find(|&&u| u >= self.output_size) {
            return Err(WeightsError::UsedOutput {
                index,
                output_size: self.output_size,
            });
        }
        Ok(())
    }

    /// Neuron counts per layer, input first.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.layers.iter().map(|l| l.rows).collect();
        if let Some(last) = self.layers.last() {
            sizes.push(last.cols);
        }
        sizes
    }

    pub fn neuron_count(&self) -> usize {
        self.layer_sizes().iter().sum()
    }

    pub fn to_json(&self) -> String {
        let doc = ModelJson {
            format_version: FORMAT_VERSION,
            name: self.name.clone(),
            output_size: self.output_size,
            used_outputs: self.used_outputs.iter().copied().collect(),
            layers: self
                .layers
                .iter()
                .map(|l| LayerJson {
                    rows: l.rows,
                    cols: l.cols,
                    weights: l.weights.chunks(l.cols).map(<[f64]>::to_vec).collect(),
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("weights serialize to JSON")
    }
}

/// Parses a weights file (UTF-8 JSON, layers ordered input to output).
pub fn parse_weights_file(bytes: &[u8]) -> Result<NetworkModel, WeightsError> {
    let doc: ModelJson = serde_json::from_slice(bytes)?;
    if doc.format_version != FORMAT_VERSION {
        return Err(WeightsError::Version(doc.format_version));
    }
    let mut layers = Vec::with_capacity(doc.layers.len());
    for (k, layer) in doc.layers.into_iter().enumerate() {
        if layer.weights.len() != layer.rows {
            return Err(WeightsError::RowCount {
                layer: k,
                expected: layer.rows,
                found: layer.weights.len(),
            });
        }
        let mut flat = Vec::with_capacity(layer.rows * layer.cols);
        for (i, row) in layer.weights.into_iter().enumerate() {
            if row.len() != layer.cols {
                return Err(WeightsError::ColCount {
                    layer: k,
                    row: i,
                    expected: layer.cols,
                    found: row.len(),
                });
            }
            flat.extend(row);
        }
        layers.push(LayerMatrix::checked(k, layer.rows, layer.cols, flat)?);
    }
    NetworkModel::new(doc.name, layers, doc.output_size, doc.used_outputs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NeuronId(pub usize);

impl fmt::Display for NeuronId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Weighted layered DAG over globally numbered neurons.
///
/// Layer depth 0 is the output layer; depth `d` is `d` weight matrices away
/// from it.
#[derive(Debug, Clone)]
pub struct NetworkGraph {
    model: NetworkModel,
    /// Neuron count per depth, output first.
    depth_sizes: Vec<usize>,
    /// First global index at each depth, plus a trailing total.
    offsets: Vec<usize>,
    layer_of: Vec<usize>,
}

/// Numbers neurons from the output layer toward the input layer.
pub fn assign_global_indices(model: &NetworkModel) -> NetworkGraph {
    let mut depth_sizes = model.layer_sizes();
    depth_sizes.reverse();
    let mut offsets = Vec::with_capacity(depth_sizes.len() + 1);
    let mut acc = 0;
    for &size in &depth_sizes {
        offsets.push(acc);
        acc += size;
    }
    offsets.push(acc);
    let layer_of = depth_sizes
        .iter()
        .enumerate()
        .flat_map(|(d, &size)| std::iter::repeat_n(d, size))
        .collect();
    NetworkGraph {
        model: model.clone(),
        depth_sizes,
        offsets,
        layer_of,
    }
}

impl NetworkGraph {
    pub fn n(&self) -> usize {
        self.layer_of.len()
    }

    pub fn model(&self) -> &NetworkModel {
        &self.model
    }

    /// Depth of neuron `i` counted in weight layers from the output.
    pub fn layer_of(&self, i: usize) -> usize {
        self.layer_of[i]
    }

    pub fn depth_count(&self) -> usize {
        self.depth_sizes.len()
    }

    pub fn depth_range(&self, depth: usize) -> std::ops::Range<usize> {
        self.offsets[depth]..self.offsets[depth + 1]
    }

    /// Global id of the neuron at `position` within the layer at `depth`.
    pub fn neuron_at(&self, depth: usize, position: usize) -> NeuronId {
        assert!(position < self.depth_sizes[depth]);
        NeuronId(self.offsets[depth] + position)
    }

    /// Inverse of [`NetworkGraph::neuron_at`].
    pub fn position_of(&self, id: NeuronId) -> (usize, usize) {
        let depth = self.layer_of[id.0];
        (depth, id.0 - self.offsets[depth])
    }

    /// Weight matrix whose destinations sit at `depth`.
    fn matrix_into(&self, depth: usize) -> &LayerMatrix {
        let layers = &self.model.layers;
        &layers[layers.len() - 1 - depth]
    }

    /// Forward weight of the edge `i -> j`, zero when the neurons are not adjacent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (di, dj) = (self.layer_of[i], self.layer_of[j]);
        if di != dj + 1 {
            return 0.0;
        }
        self.matrix_into(dj)
            .get(i - self.offsets[di], j - self.offsets[dj])
    }

    /// Sources feeding neuron `j` with their weights, in ascending index order.
    pub fn incoming(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let dj = self.layer_of[j];
        let col = j - self.offsets[dj];
        let source =
            (dj + 1 < self.depth_sizes.len()).then(|| (self.matrix_into(dj), self.offsets[dj + 1]));
        source
            .into_iter()
            .flat_map(move |(m, base)| (0..m.rows()).map(move |r| (base + r, m.get(r, col))))
    }

    /// Destinations fed by neuron `i` with their weights, in ascending index order.
    pub fn outgoing(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let di = self.layer_of[i];
        let target = (di > 0).then(|| {
            (
                self.matrix_into(di - 1),
                self.offsets[di - 1],
                i - self.offsets[di],
            )
        });
        target.into_iter().flat_map(|(m, base, row)| {
            m.row(row)
                .iter()
                .enumerate()
                .map(move |(c, &w)| (base + c, w))
        })
    }

    pub fn output_ids(&self) -> BTreeSet<NeuronId> {
        (0..self.model.output_size).map(NeuronId).collect()
    }

    /// Output neurons whose class never appeared in training.
    pub fn unused_output_ids(&self) -> BTreeSet<NeuronId> {
        (0..self.model.output_size)
            .filter(|o| !self.model.used_outputs.contains(o))
            .map(NeuronId)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(rows: usize, cols: usize, w: &[f64]) -> LayerMatrix {
        LayerMatrix::new(rows, cols, w.to_vec()).unwrap()
    }

    #[test]
    fn parses_smallest_chained_network() {
        let json = br#"{"format_version":1,"name":"t","output_size":1,"used_outputs":[0],
            "layers":[{"rows":2,"cols":2,"weights":[[1,2],[3,4]]},{"rows":2,"cols":1,"weights":[[5],[6]]}]}"#;
        let m = parse_weights_file(json).unwrap();
        assert_eq!(m.layers.len(), 2);
        assert_eq!(m.layer_sizes(), vec![2, 2, 1]);
        assert_eq!(m.layers[0].get(1, 0), 3.0);
    }

    #[test]
    fn rejects_shape_mismatch() {
        let json = br#"{"format_version":1,"name":"t","output_size":1,"used_outputs":[],
            "layers":[{"rows":2,"cols":2,"weights":[[1,2],[3,4]]},{"rows":3,"cols":1,"weights":[[5],[6],[7]]}]}"#;
        match parse_weights_file(json) {
            Err(WeightsError::ShapeMismatch {
                cols: 2, rows: 3, ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn distinct_errors() {
        let bad_syntax = br#"{"format_version":1,"#;
        assert!(matches!(
            parse_weights_file(bad_syntax),
            Err(WeightsError::Syntax(_))
        ));

        let missing = br#"{"format_version":1,"name":"t","used_outputs":[],"layers":[]}"#;
        assert!(matches!(
            parse_weights_file(missing),
            Err(WeightsError::Syntax(_))
        ));

        let ragged = br#"{"format_version":1,"name":"t","output_size":2,"used_outputs":[],
            "layers":[{"rows":2,"cols":2,"weights":[[1,2],[3]]}]}"#;
        assert!(matches!(
            parse_weights_file(ragged),
            Err(WeightsError::ColCount {
                layer: 0,
                row: 1,
                ..
            })
        ));

        let out_of_range = br#"{"format_version":1,"name":"t","output_size":2,"used_outputs":[2],
            "layers":[{"rows":1,"cols":2,"weights":[[1,2]]}]}"#;
        assert!(matches!(
            parse_weights_file(out_of_range),
            Err(WeightsError::UsedOutput { index: 2, .. })
        ));

        let empty = br#"{"format_version":1,"name":"t","output_size":0,"used_outputs":[],
            "layers":[{"rows":1,"cols":0,"weights":[[]]}]}"#;
        assert!(matches!(
            parse_weights_file(empty),
            Err(WeightsError::EmptyLayer { .. })
        ));

        let version = br#"{"format_version":2,"name":"t","output_size":1,"used_outputs":[],
            "layers":[{"rows":1,"cols":1,"weights":[[1]]}]}"#;
        assert!(matches!(
            parse_weights_file(version),
            Err(WeightsError::Version(2))
        ));
    }

    #[test]
    fn non_finite_weight_names_entry() {
        let err = LayerMatrix::new(2, 2, vec![0.0, 1.0, f64::NAN, 2.0]).unwrap_err();
        assert!(matches!(
            err,
            WeightsError::NonFinite { row: 1, col: 0, .. }
        ));
        assert!(err.to_string().contains("(1,0)"));
    }

    #[test]
    fn ignores_unknown_keys() {
        let json =
            br#"{"format_version":1,"name":"t","output_size":1,"used_outputs":[0],"extra":{"a":1},
            "layers":[{"rows":1,"cols":1,"weights":[[0.5]]}]}"#;
        assert!(parse_weights_file(json).is_ok());
    }

    #[test]
    fn numbering_two_hidden_one_output() {
        let m = NetworkModel::new(
            "t",
            vec![layer(2, 2, &[1.0; 4]), layer(2, 1, &[1.0; 2])],
            1,
            [0],
        )
        .unwrap();
        let g = assign_global_indices(&m);
        assert_eq!(g.n(), 5);
        assert_eq!(g.neuron_at(0, 0), NeuronId(0));
        assert_eq!(g.neuron_at(1, 0), NeuronId(1));
        assert_eq!(g.neuron_at(1, 1), NeuronId(2));
        assert_eq!(g.neuron_at(2, 0), NeuronId(3));
        assert_eq!(g.neuron_at(2, 1), NeuronId(4));
    }

    #[test]
    fn numbering_single_layer() {
        let m = NetworkModel::new("t", vec![layer(2, 3, &[1.0; 6])], 3, [0, 1, 2]).unwrap();
        let g = assign_global_indices(&m);
        assert_eq!(g.depth_range(0), 0..3);
        assert_eq!(g.depth_range(1), 3..5);
    }

    #[test]
    fn numbering_mnist_shape() {
        let sizes = [784usize, 300, 100, 10];
        let layers = sizes
            .windows(2)
            .map(|p| layer(p[0], p[1], &vec![0.0; p[0] * p[1]]))
            .collect();
        let m = NetworkModel::new("mnist", layers, 10, 0..10).unwrap();
        let g = assign_global_indices(&m);
        assert_eq!(g.depth_range(0), 0..10);
        assert_eq!(g.depth_range(1), 10..110);
        assert_eq!(g.depth_range(2), 110..410);
        assert_eq!(g.depth_range(3), 410..1194);
    }

    #[test]
    fn weight_lookup_and_adjacency() {
        // input (2) -> hidden (2) -> output (1)
        let m = NetworkModel::new(
            "t",
            vec![layer(2, 2, &[1.0, 2.0, 3.0, 4.0]), layer(2, 1, &[5.0, 6.0])],
            1,
            [0],
        )
        .unwrap();
        let g = assign_global_indices(&m);
        assert_eq!(g.weight(1, 0), 5.0);
        assert_eq!(g.weight(2, 0), 6.0);
        assert_eq!(g.weight(3, 1), 1.0);
        assert_eq!(g.weight(3, 2), 2.0);
        assert_eq!(g.weight(4, 1), 3.0);
        assert_eq!(g.weight(3, 0), 0.0);
        assert_eq!(g.weight(0, 1), 0.0);
        assert_eq!(g.incoming(1).collect::<Vec<_>>(), vec![(3, 1.0), (4, 3.0)]);
        assert_eq!(g.outgoing(4).collect::<Vec<_>>(), vec![(1, 3.0), (2, 4.0)]);
        assert_eq!(g.incoming(4).count(), 0);
        assert_eq!(g.outgoing(0).count(), 0);
    }

    #[test]
    fn unused_outputs() {
        let m = NetworkModel::new("t", vec![layer(1, 4, &[1.0; 4])], 4, [0, 2]).unwrap();
        let g = assign_global_indices(&m);
        assert_eq!(
            g.unused_output_ids(),
            [NeuronId(1), NeuronId(3)].into_iter().collect()
        );
        assert_eq!(g.output_ids().len(), 4);
    }
}
