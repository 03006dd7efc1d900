use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::tensor_nn::{LayerSpec, Shape};

use super::NasError;

pub const KERNELS: [usize; 3] = [3, 5, 7];
pub const STRIDES: [usize; 3] = [1, 2, 3];
pub const FILTERS: [usize; 5] = [4, 8, 16, 32, 64];
pub const POOL_KERNELS: [usize; 2] = [2, 3];
pub const MAX_LAYERS: usize = 12;
pub const INPUT_SIDE: usize = 32;
const MAX_RESAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gene {
    Conv {
        kernel: usize,
        stride: usize,
        filters: usize,
    },
    MaxPool {
        kernel: usize,
    },
}

impl Gene {
    pub fn is_conv(&self) -> bool {
        matches!(self, Gene::Conv { .. })
    }

    fn in_search_space(&self) -> bool {
        match *self {
            Gene::Conv {
                kernel,
                stride,
                filters,
            } => {
                KERNELS.contains(&kernel) && STRIDES.contains(&stride) && FILTERS.contains(&filters)
            }
            Gene::MaxPool { kernel } => POOL_KERNELS.contains(&kernel),
        }
    }
}

impl std::fmt::Display for Gene {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Gene::Conv {
                kernel,
                stride,
                filters,
            } => write!(f, "conv{kernel}/{stride}x{filters}"),
            Gene::MaxPool { kernel } => write!(f, "pool{kernel}"),
        }
    }
}

/// A spectrum-branch architecture: convolutions (each followed by ReLU)
/// and max-pooling layers, in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Genome {
    pub layers: Vec<Gene>,
    #[serde(default)]
    pub id: u64,
    #[serde(default)]
    pub parent_id: Option<u64>,
}

/// One mutation kind of the search space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mutation {
    InsertConv,
    RemoveConv,
    InsertPool,
    RemovePool,
    ChangeConv,
}

impl Genome {
    pub fn new(layers: Vec<Gene>) -> Self {
        Genome {
            layers,
            id: 0,
            parent_id: None,
        }
    }

    /// Identity used for memoisation; ignores ids.
    pub fn canonical(&self) -> String {
        self.layers
            .iter()
            .map(Gene::to_string)
            .collect::<Vec<_>>()
            .join("-")
    }

    pub fn n_convs(&self) -> usize {
        self.layers.iter().filter(|g| g.is_conv()).count()
    }

    pub fn n_pools(&self) -> usize {
        self.layers.len() - self.n_convs()
    }

    /// Spectrum-branch layers, each Conv followed by ReLU.
    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for g in &self.layers {
            match *g {
                Gene::Conv {
                    kernel,
                    stride,
                    filters,
                } => {
                    out.push(LayerSpec::conv(kernel, stride, filters));
                    out.push(LayerSpec::ReLU);
                }
                Gene::MaxPool { kernel } => out.push(LayerSpec::MaxPool2D { kernel }),
            }
        }
        out
    }

    /// Output shape on the (32, 32, 1) spectrum input.
    pub fn output_shape(&self) -> Result<Shape, NasError> {
        let mut s = Shape::Spatial {
            h: INPUT_SIDE,
            w: INPUT_SIDE,
            c: 1,
        };
        for l in self.layer_specs() {
            s = l
                .output_shape(s)
                .map_err(|e| NasError::InvalidGenome(format!("{}: {e}", self.canonical())))?;
        }
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), NasError> {
        if self.layers.is_empty() || self.layers.len() > MAX_LAYERS {
            return Err(NasError::InvalidGenome(format!(
                "genome must have 1..={MAX_LAYERS} layers, has {}",
                self.layers.len()
            )));
        }
        if self.layers.iter().any(|g| match *g {
            Gene::Conv {
                kernel,
                stride,
                filters,
            } => kernel == 0 || stride == 0 || filters == 0,
            Gene::MaxPool { kernel } => kernel == 0,
        }) {
            return Err(NasError::InvalidGenome(format!(
                "{}: zero-sized layer",
                self.canonical()
            )));
        }
        self.output_shape().map(|_| ())
    }

    /// Whether every layer uses the kernel/stride/filter grids of the search.
    pub fn in_search_space(&self) -> bool {
        self.layers.iter().all(Gene::in_search_space)
    }

    /// Mutation kinds applicable without breaking the length bounds.
    pub fn available_mutations(&self) -> Vec<Mutation> {
        let len = self.layers.len();
        let mut m = Vec::with_capacity(5);
        if len < MAX_LAYERS {
            m.push(Mutation::InsertConv);
        }
        if self.n_convs() > 0 && len > 1 {
            m.push(Mutation::RemoveConv);
        }
        if len < MAX_LAYERS {
            m.push(Mutation::InsertPool);
        }
        if self.n_pools() > 0 && len > 1 {
            m.push(Mutation::RemovePool);
        }
        if self.n_convs() > 0 {
            m.push(Mutation::ChangeConv);
        }
        m
    }

    fn apply<R: Rng + ?Sized>(&self, kind: Mutation, rng: &mut R) -> Vec<Gene> {
        let mut layers = self.layers.clone();
        let nth = |pred: fn(&Gene) -> bool, rng: &mut R| -> usize {
            let idx: Vec<usize> = (0..layers.len()).filter(|&i| pred(&layers[i])).collect();
            *idx.choose(rng).expect("mutation kind was available")
        };
        match kind {
            Mutation::InsertConv => {
                let at = rng.gen_range(0..=layers.len());
                layers.insert(at, random_conv(rng));
            }
            Mutation::InsertPool => {
                let at = rng.gen_range(0..=layers.len());
                layers.insert(
                    at,
                    Gene::MaxPool {
                        kernel: *POOL_KERNELS.choose(rng).unwrap(),
                    },
                );
            }
            Mutation::RemoveConv => {
                let i = nth(Gene::is_conv, rng);
                layers.remove(i);
            }
            Mutation::RemovePool => {
                let i = nth(|g| !g.is_conv(), rng);
                layers.remove(i);
            }
            Mutation::ChangeConv => {
                let i = nth(Gene::is_conv, rng);
                if let Gene::Conv {
                    kernel,
                    stride,
                    filters,
                } = &mut layers[i]
                {
                    match rng.gen_range(0..3) {
                        0 => *kernel = other_value(&KERNELS, *kernel, rng),
                        1 => *stride = other_value(&STRIDES, *stride, rng),
                        _ => *filters = other_value(&FILTERS, *filters, rng),
                    }
                }
            }
        }
        layers
    }

    /// Applies one mutation whose kind is drawn uniformly from the
    /// available kinds. If the result is invalid, the mutation's position
    /// and values are redrawn (same kind) up to 20 times, after which the
    /// layers are returned unchanged. The child records this genome's id
    /// as its parent; the caller assigns the child's own id.
    pub fn mutate<R: Rng + ?Sized>(&self, rng: &mut R) -> Genome {
        let kinds = self.available_mutations();
        let mut layers = self.layers.clone();
        if let Some(&kind) = kinds.choose(rng) {
            for _ in 0..MAX_RESAMPLES {
                let cand = Genome::new(self.apply(kind, rng));
                if cand.validate().is_ok() {
                    layers = cand.layers;
                    break;
                }
            }
        }
        Genome {
            layers,
            id: self.id,
            parent_id: Some(self.id),
        }
    }
}

fn random_conv<R: Rng + ?Sized>(rng: &mut R) -> Gene {
    Gene::Conv {
        kernel: *KERNELS.choose(rng).unwrap(),
        stride: *STRIDES.choose(rng).unwrap(),
        filters: *FILTERS.choose(rng).unwrap(),
    }
}

fn other_value<R: Rng + ?Sized>(grid: &[usize], current: usize, rng: &mut R) -> usize {
    let others: Vec<usize> = grid.iter().copied().filter(|&v| v != current).collect();
    *others.choose(rng).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn conv(kernel: usize, stride: usize, filters: usize) -> Gene {
        Gene::Conv {
            kernel,
            stride,
            filters,
        }
    }

    #[test]
    fn validity_bounds() {
        assert!(Genome::new(vec![]).validate().is_err());
        assert!(Genome::new(vec![conv(3, 1, 8); 13]).validate().is_err());
        assert!(Genome::new(vec![conv(0, 1, 8)]).validate().is_err());
        assert!(!Genome::new(vec![conv(4, 1, 8)]).in_search_space());
        assert!(Genome::new(vec![conv(4, 1, 8)]).validate().is_ok());
        // 32 -> 9 -> 1, then another conv cannot fit.
        let collapsed = Genome::new(vec![conv(7, 3, 8), conv(7, 3, 8), conv(3, 1, 8)]);
        assert!(matches!(
            collapsed.validate(),
            Err(NasError::InvalidGenome(_))
        ));
        assert!(
            Genome::new(vec![conv(3, 1, 8), Gene::MaxPool { kernel: 3 }])
                .validate()
                .is_ok()
        );
    }

    #[test]
    fn available_mutations_respect_bounds() {
        let single = Genome::new(vec![conv(3, 1, 8)]);
        let kinds = single.available_mutations();
        assert!(!kinds.contains(&Mutation::RemoveConv));
        assert!(!kinds.contains(&Mutation::RemovePool));
        assert!(kinds.contains(&Mutation::InsertConv));

        let full = Genome::new(vec![conv(3, 1, 4); MAX_LAYERS]);
        let kinds = full.available_mutations();
        assert!(!kinds.contains(&Mutation::InsertConv) && !kinds.contains(&Mutation::InsertPool));
    }

    #[test]
    fn mutation_changes_one_thing_and_stays_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut g = Genome::new(vec![conv(3, 1, 8), Gene::MaxPool { kernel: 3 }]);
        for _ in 0..500 {
            let child = g.mutate(&mut rng);
            assert!(child.validate().is_ok() && child.in_search_space());
            let diff = child.layers.len() as isize - g.layers.len() as isize;
            assert!(diff.abs() <= 1);
            if diff == 0 && child.layers != g.layers {
                let changed = g
                    .layers
                    .iter()
                    .zip(&child.layers)
                    .filter(|(a, b)| a != b)
                    .count();
                assert_eq!(changed, 1);
            }
            g = child;
        }
    }

    #[test]
    fn canonical_ignores_ids() {
        let mut a = Genome::new(vec![conv(5, 2, 16), Gene::MaxPool { kernel: 2 }]);
        let b = a.clone();
        a.id = 7;
        a.parent_id = Some(3);
        assert_eq!(a.canonical(), b.canonical());
        assert_eq!(a.canonical(), "conv5/2x16-pool2");
    }
}
