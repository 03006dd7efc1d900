//! Concrete architectures: the hand-designed CNN, the search seed, genome
//! spectrum models, the two-branch DeepHybrid and the reflection-only
//! ablation.

use serde::{Deserialize, Serialize};

use crate::nas_engine::{Gene, Genome, NasError, INPUT_SIDE};
use crate::tensor_nn::{Architecture, LayerSpec, Shape};

pub const HEAD_WIDTH: usize = 64;
pub const N_CLASSES: usize = 4;
pub const RCS_LEN: usize = 30;

pub const ROI_SHAPE: Shape = Shape::Spatial {
    h: INPUT_SIDE,
    w: INPUT_SIDE,
    c: 1,
};
pub const RCS_SHAPE: Shape = Shape::Seq { len: RCS_LEN, c: 1 };

fn conv(kernel: usize, stride: usize, filters: usize) -> Gene {
    Gene::Conv {
        kernel,
        stride,
        filters,
    }
}

/// The hand-designed network expressed as a genome (98,444 parameters
/// with the shared head).
pub fn manual_genome() -> Genome {
    Genome::new(vec![
        conv(3, 1, 16),
        Gene::MaxPool { kernel: 2 },
        conv(3, 1, 40),
        Gene::MaxPool { kernel: 2 },
    ])
}

pub fn manual_cnn() -> Architecture {
    spectrum_model(&manual_genome()).expect("manual genome is valid")
}

/// Starting point of the search: one 3×3 convolution with 8 filters,
/// pooled so the shared FC head stays below the manual budget.
pub fn seed_genome() -> Genome {
    Genome::new(vec![conv(3, 1, 8), Gene::MaxPool { kernel: 3 }])
}

/// A compact strided spectrum branch (29,540 parameters with the head)
/// used as the default spectrum model of the experiments.
pub fn reference_genome() -> Genome {
    Genome::new(vec![conv(7, 2, 8), conv(5, 2, 16)])
}

/// Shared per-reflection feature extractor: 1→4→8 pointwise channels and a
/// global max over the 30 rows.
pub fn reflection_branch() -> Vec<LayerSpec> {
    vec![
        LayerSpec::Conv1DPointwise { filters: 4 },
        LayerSpec::ReLU,
        LayerSpec::Conv1DPointwise { filters: 8 },
        LayerSpec::ReLU,
        LayerSpec::GlobalMaxPool1D,
    ]
}

fn head() -> [LayerSpec; 4] {
    [
        LayerSpec::fc(HEAD_WIDTH),
        LayerSpec::ReLU,
        LayerSpec::fc(N_CLASSES),
        LayerSpec::Softmax,
    ]
}

pub fn spectrum_model(g: &Genome) -> Result<Architecture, NasError> {
    g.validate()?;
    let mut layers = g.layer_specs();
    layers.push(LayerSpec::Flatten);
    layers.extend(head());
    let arch = Architecture::sequential(ROI_SHAPE, layers);
    arch.validate()?;
    Ok(arch)
}

pub fn deephybrid(g: &Genome) -> Result<Architecture, NasError> {
    g.validate()?;
    let mut spectrum = g.layer_specs();
    spectrum.push(LayerSpec::Flatten);
    let mut tail = vec![LayerSpec::Concat];
    tail.extend(head());
    let arch = Architecture {
        inputs: vec![ROI_SHAPE, RCS_SHAPE],
        branches: vec![spectrum, reflection_branch()],
        head: tail,
    };
    arch.validate()?;
    Ok(arch)
}

pub fn reflection_only() -> Architecture {
    let mut layers = reflection_branch();
    layers.extend(head());
    Architecture::sequential(RCS_SHAPE, layers)
}

/// Model families trained and compared by the experiments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Manual,
    Spectrum(Genome),
    Hybrid(Genome),
    ReflectionOnly,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Manual => "manual",
            ModelKind::Spectrum(_) => "spectrum",
            ModelKind::Hybrid(_) => "hybrid",
            ModelKind::ReflectionOnly => "reflection-only",
        }
    }

    pub fn architecture(&self) -> Result<Architecture, NasError> {
        match self {
            ModelKind::Manual => Ok(manual_cnn()),
            ModelKind::Spectrum(g) => spectrum_model(g),
            ModelKind::Hybrid(g) => deephybrid(g),
            ModelKind::ReflectionOnly => Ok(reflection_only()),
        }
    }

    /// Selects the model inputs from a sample's ROI and RCS vector.
    pub fn inputs<'a>(&self, roi: &'a [f32], rcs: &'a [f32]) -> Vec<&'a [f32]> {
        match self {
            ModelKind::Manual | ModelKind::Spectrum(_) => vec![roi],
            ModelKind::Hybrid(_) => vec![roi, rcs],
            ModelKind::ReflectionOnly => vec![rcs],
        }
    }
}
