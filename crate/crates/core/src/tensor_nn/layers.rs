use serde::{Deserialize, Serialize};

use super::NnError;

/// Activation shape of one sample (no batch axis), channels last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Spatial { h: usize, w: usize, c: usize },
    Seq { len: usize, c: usize },
    Flat(usize),
}

impl Shape {
    pub fn numel(self) -> usize {
        match self {
            Shape::Spatial { h, w, c } => h * w * c,
            Shape::Seq { len, c } => len * c,
            Shape::Flat(n) => n,
        }
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Shape::Spatial { h, w, c } => write!(f, "({h}, {w}, {c})"),
            Shape::Seq { len, c } => write!(f, "({len}, {c})"),
            Shape::Flat(n) => write!(f, "({n},)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Padding {
    #[default]
    Valid,
    Same,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayerSpec {
    Conv2D {
        kernel: usize,
        stride: usize,
        filters: usize,
        #[serde(default)]
        padding: Padding,
    },
    MaxPool2D {
        kernel: usize,
    },
    FullyConnected {
        neurons: usize,
    },
    ReLU,
    Softmax,
    Flatten,
    /// 1×1 convolution over a `(len, channels)` sequence.
    Conv1DPointwise {
        filters: usize,
    },
    GlobalMaxPool1D,
    Concat,
}

impl LayerSpec {
    pub fn conv(kernel: usize, stride: usize, filters: usize) -> Self {
        LayerSpec::Conv2D {
            kernel,
            stride,
            filters,
            padding: Padding::Valid,
        }
    }

    pub fn fc(neurons: usize) -> Self {
        LayerSpec::FullyConnected { neurons }
    }

    pub fn is_parametric(&self) -> bool {
        matches!(
            self,
            LayerSpec::Conv2D { .. }
                | LayerSpec::FullyConnected { .. }
                | LayerSpec::Conv1DPointwise { .. }
        )
    }

    pub(crate) fn check(&self) -> Result<(), NnError> {
        let bad = |m: &str| Err(NnError::InvalidArchitecture(format!("{self:?}: {m}")));
        match *self {
            LayerSpec::Conv2D {
                kernel,
                stride,
                filters,
                ..
            } => {
                if kernel == 0 || stride == 0 || filters == 0 {
                    return bad("kernel, stride and filters must be >= 1");
                }
            }
            LayerSpec::MaxPool2D { kernel: 0 } => return bad("kernel must be >= 1"),
            LayerSpec::FullyConnected { neurons: 0 } => return bad("neurons must be >= 1"),
            LayerSpec::Conv1DPointwise { filters: 0 } => return bad("filters must be >= 1"),
            _ => {}
        }
        Ok(())
    }

    /// Output shape for a single input. `Concat` is resolved by the graph.
    pub fn output_shape(&self, input: Shape) -> Result<Shape, NnError> {
        self.check()?;
        let mismatch = || NnError::ShapeMismatch(format!("{self:?} cannot take input {input}"));
        match (*self, input) {
            (
                LayerSpec::Conv2D {
                    kernel,
                    stride,
                    filters,
                    padding,
                },
                Shape::Spatial { h, w, .. },
            ) => {
                let (oh, ow) = (
                    conv_out(h, kernel, stride, padding),
                    conv_out(w, kernel, stride, padding),
                );
                if oh == 0 || ow == 0 {
                    return Err(NnError::ShapeMismatch(format!(
                        "{self:?} collapses spatial size {h}x{w} below 1"
                    )));
                }
                Ok(Shape::Spatial {
                    h: oh,
                    w: ow,
                    c: filters,
                })
            }
            (LayerSpec::MaxPool2D { kernel }, Shape::Spatial { h, w, c }) => {
                if h / kernel == 0 || w / kernel == 0 {
                    return Err(NnError::ShapeMismatch(format!(
                        "{self:?} collapses spatial size {h}x{w} below 1"
                    )));
                }
                Ok(Shape::Spatial {
                    h: h / kernel,
                    w: w / kernel,
                    c,
                })
            }
            (LayerSpec::FullyConnected { neurons }, Shape::Flat(_)) => Ok(Shape::Flat(neurons)),
            (LayerSpec::ReLU, s) => Ok(s),
            (LayerSpec::Softmax, Shape::Flat(n)) => Ok(Shape::Flat(n)),
            (LayerSpec::Flatten, s) => Ok(Shape::Flat(s.numel())),
            (LayerSpec::Conv1DPointwise { filters }, Shape::Seq { len, .. }) => {
                Ok(Shape::Seq { len, c: filters })
            }
            (LayerSpec::GlobalMaxPool1D, Shape::Seq { c, .. }) => Ok(Shape::Flat(c)),
            _ => Err(mismatch()),
        }
    }

    /// Learnable `(weight, bias)` element counts for a given input shape.
    pub fn param_sizes(&self, input: Shape) -> (usize, usize) {
        match (*self, input) {
            (
                LayerSpec::Conv2D {
                    kernel, filters, ..
                },
                Shape::Spatial { c, .. },
            ) => (kernel * kernel * c * filters, filters),
            (LayerSpec::FullyConnected { neurons }, s) => (s.numel() * neurons, neurons),
            (LayerSpec::Conv1DPointwise { filters }, Shape::Seq { c, .. }) => {
                (c * filters, filters)
            }
            _ => (0, 0),
        }
    }

    /// Multiply-accumulates per inference, biases and activations excluded.
    pub fn macs(&self, input: Shape, output: Shape) -> u64 {
        match (*self, input, output) {
            (
                LayerSpec::Conv2D { kernel, .. },
                Shape::Spatial { c, .. },
                Shape::Spatial { h, w, c: f },
            ) => (h * w * f * kernel * kernel * c) as u64,
            (LayerSpec::FullyConnected { neurons }, s, _) => (s.numel() * neurons) as u64,
            (LayerSpec::Conv1DPointwise { filters }, Shape::Seq { len, c }, _) => {
                (len * filters * c) as u64
            }
            _ => 0,
        }
    }

    /// Fan-in used for He initialisation.
    pub(crate) fn fan_in(&self, input: Shape) -> usize {
        match (*self, input) {
            (LayerSpec::Conv2D { kernel, .. }, Shape::Spatial { c, .. }) => kernel * kernel * c,
            (LayerSpec::FullyConnected { .. }, s) => s.numel(),
            (LayerSpec::Conv1DPointwise { .. }, Shape::Seq { c, .. }) => c,
            _ => 1,
        }
    }
}

pub(crate) fn conv_out(n: usize, kernel: usize, stride: usize, padding: Padding) -> usize {
    match padding {
        Padding::Valid => {
            if n < kernel {
                0
            } else {
                (n - kernel) / stride + 1
            }
        }
        Padding::Same => n.div_ceil(stride),
    }
}

/// Leading padding for `Same` convolutions.
pub(crate) fn pad_before(n: usize, kernel: usize, stride: usize, padding: Padding) -> usize {
    match padding {
        Padding::Valid => 0,
        Padding::Same => {
            let out = n.div_ceil(stride);
            ((out - 1) * stride + kernel).saturating_sub(n) / 2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_examples() {
        let fc = LayerSpec::fc(64);
        assert_eq!(fc.param_sizes(Shape::Flat(8)), (512, 64));
        assert_eq!(
            LayerSpec::fc(10).macs(Shape::Flat(100), Shape::Flat(10)),
            1000
        );
        let conv = LayerSpec::conv(3, 1, 8);
        let input = Shape::Spatial { h: 32, w: 32, c: 1 };
        let out = conv.output_shape(input).unwrap();
        assert_eq!(out, Shape::Spatial { h: 30, w: 30, c: 8 });
        assert_eq!(conv.macs(input, out), 64_800);
        for s in [
            LayerSpec::ReLU,
            LayerSpec::MaxPool2D { kernel: 2 },
            LayerSpec::GlobalMaxPool1D,
        ] {
            assert_eq!(s.param_sizes(input), (0, 0));
            assert_eq!(s.macs(input, input), 0);
        }
    }

    #[test]
    fn same_padding_shapes() {
        let c = LayerSpec::Conv2D {
            kernel: 5,
            stride: 2,
            filters: 3,
            padding: Padding::Same,
        };
        assert_eq!(
            c.output_shape(Shape::Spatial { h: 9, w: 8, c: 1 }).unwrap(),
            Shape::Spatial { h: 5, w: 4, c: 3 }
        );
        assert_eq!(pad_before(9, 5, 2, Padding::Same), 2);
    }

    #[test]
    fn collapse_is_rejected() {
        let c = LayerSpec::conv(3, 1, 8);
        assert!(c.output_shape(Shape::Spatial { h: 2, w: 5, c: 1 }).is_err());
        assert!(LayerSpec::MaxPool2D { kernel: 3 }
            .output_shape(Shape::Spatial { h: 2, w: 2, c: 1 })
            .is_err());
        assert!(LayerSpec::fc(3)
            .output_shape(Shape::Seq { len: 2, c: 2 })
            .is_err());
        assert!(LayerSpec::conv(0, 1, 1)
            .output_shape(Shape::Spatial { h: 5, w: 5, c: 1 })
            .is_err());
    }
}
