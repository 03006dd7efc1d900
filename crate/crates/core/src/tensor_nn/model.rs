use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layers::{pad_before, LayerSpec, Shape};
use super::{NnError, Scalar};

/// Weight-free description of a model: one layer list per input branch and
/// a shared head. A multi-branch head starts with `Concat`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub inputs: Vec<Shape>,
    pub branches: Vec<Vec<LayerSpec>>,
    #[serde(default)]
    pub head: Vec<LayerSpec>,
}

pub(crate) struct Resolved {
    pub branch_shapes: Vec<Vec<Shape>>,
    pub head_shapes: Vec<Shape>,
}

impl Architecture {
    pub fn sequential(input: Shape, layers: Vec<LayerSpec>) -> Self {
        Architecture {
            inputs: vec![input],
            branches: vec![layers],
            head: Vec::new(),
        }
    }

    fn invalid<R>(msg: impl Into<String>) -> Result<R, NnError> {
        Err(NnError::InvalidArchitecture(msg.into()))
    }

    /// Shape inference plus structural checks.
    pub(crate) fn resolve(&self) -> Result<Resolved, NnError> {
        if self.inputs.is_empty() || self.inputs.len() != self.branches.len() {
            return Self::invalid("need exactly one branch per input");
        }
        let multi = self.branches.len() > 1;
        if multi && self.head.first() != Some(&LayerSpec::Concat) {
            return Self::invalid("multi-input models must start the head with Concat");
        }
        if !multi && self.head.is_empty() && self.branches[0].is_empty() {
            return Self::invalid("model has no layers");
        }

        let mut branch_shapes = Vec::with_capacity(self.branches.len());
        for (input, layers) in self.inputs.iter().zip(&self.branches) {
            let mut shapes = vec![*input];
            for l in layers {
                if *l == LayerSpec::Concat {
                    return Self::invalid("Concat is only allowed at the start of the head");
                }
                shapes.push(l.output_shape(*shapes.last().unwrap())?);
            }
            branch_shapes.push(shapes);
        }

        let mut head_shapes = Vec::with_capacity(self.head.len() + 1);
        let mut rest = &self.head[..];
        if multi {
            let mut total = 0;
            for s in &branch_shapes {
                match s.last().unwrap() {
                    Shape::Flat(n) => total += n,
                    other => {
                        return Self::invalid(format!(
                            "branch output {other} must be flat before Concat"
                        ))
                    }
                }
            }
            head_shapes.push(Shape::Flat(total));
            rest = &rest[1..];
        } else {
            head_shapes.push(*branch_shapes[0].last().unwrap());
        }
        for l in rest {
            if *l == LayerSpec::Concat {
                return Self::invalid("Concat is only allowed at the start of the head");
            }
            head_shapes.push(l.output_shape(*head_shapes.last().unwrap())?);
        }

        let last_seq: &[LayerSpec] = if self.head.iter().any(|l| *l != LayerSpec::Concat) {
            &self.head
        } else if !multi {
            &self.branches[0]
        } else {
            return Self::invalid("head has no layers after Concat");
        };
        if last_seq.last() != Some(&LayerSpec::Softmax) {
            return Self::invalid("the final layer must be Softmax");
        }
        if last_seq.len() < 2
            || !matches!(
                last_seq[last_seq.len() - 2],
                LayerSpec::FullyConnected { .. }
            )
        {
            return Self::invalid("Softmax must directly follow a FullyConnected layer");
        }
        for seq in self.branches.iter().chain(std::iter::once(&self.head)) {
            for (i, l) in seq.iter().enumerate() {
                if *l == LayerSpec::Softmax
                    && !(seq.as_ptr() == last_seq.as_ptr() && i + 1 == seq.len())
                {
                    return Self::invalid("Softmax may only appear as the final layer");
                }
                let feeds_softmax = seq.get(i + 1) == Some(&LayerSpec::Softmax);
                if l.is_parametric() && !feeds_softmax && seq.get(i + 1) != Some(&LayerSpec::ReLU) {
                    return Self::invalid(format!("{l:?} must be followed by ReLU"));
                }
            }
        }
        Ok(Resolved {
            branch_shapes,
            head_shapes,
        })
    }

    pub fn validate(&self) -> Result<(), NnError> {
        self.resolve().map(|_| ())
    }

    pub fn n_classes(&self) -> Result<usize, NnError> {
        Ok(self.resolve()?.output_shape().numel())
    }

    fn layers_with_shapes(&self, r: &Resolved) -> Vec<(LayerSpec, Shape, Shape)> {
        let mut out = Vec::new();
        for (layers, shapes) in self.branches.iter().zip(&r.branch_shapes) {
            for (i, l) in layers.iter().enumerate() {
                out.push((*l, shapes[i], shapes[i + 1]));
            }
        }
        let skip = usize::from(self.branches.len() > 1);
        for (i, l) in self.head.iter().skip(skip).enumerate() {
            out.push((*l, r.head_shapes[i], r.head_shapes[i + 1]));
        }
        out
    }

    pub fn count_params(&self) -> Result<usize, NnError> {
        let r = self.resolve()?;
        Ok(self
            .layers_with_shapes(&r)
            .iter()
            .map(|(l, i, _)| {
                let (w, b) = l.param_sizes(*i);
                w + b
            })
            .sum())
    }

    pub fn count_macs(&self) -> Result<u64, NnError> {
        let r = self.resolve()?;
        Ok(self
            .layers_with_shapes(&r)
            .iter()
            .map(|(l, i, o)| l.macs(*i, *o))
            .sum())
    }
}

impl Resolved {
    pub fn output_shape(&self) -> Shape {
        *self.head_shapes.last().unwrap()
    }
}

/// One instantiated layer with its weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    pub spec: LayerSpec,
    pub input: Shape,
    pub output: Shape,
    pub weight: Vec<T>,
    pub bias: Vec<T>,
}

/// Gradient buffers, one per weight or bias tensor in parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads<T> {
    pub tensors: Vec<Vec<T>>,
}

impl<T: Scalar> Grads<T> {
    pub fn add_assign(&mut self, other: &Grads<T>) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += *y;
            }
        }
    }

    pub fn scale(&mut self, s: T) {
        self.tensors.iter_mut().flatten().for_each(|x| *x *= s);
    }

    pub fn flat(&self) -> impl Iterator<Item = &T> {
        self.tensors.iter().flatten()
    }
}

/// Activations of one forward pass; index 0 of each list is the input.
#[derive(Debug, Clone)]
pub struct Trace<T> {
    pub branches: Vec<Vec<Vec<T>>>,
    pub head: Vec<Vec<T>>,
}

impl<T> Trace<T> {
    pub fn output(&self) -> &[T] {
        self.head.last().unwrap()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelGraph<T> {
    pub arch: Architecture,
    pub branches: Vec<Vec<Layer<T>>>,
    pub head: Vec<Layer<T>>,
}

impl<T: Scalar> ModelGraph<T> {
    /// Builds the graph with He-uniform weights and zero biases.
    pub fn new<R: Rng + ?Sized>(arch: &Architecture, rng: &mut R) -> Result<Self, NnError> {
        let r = arch.resolve()?;
        let mut make = |spec: LayerSpec, input: Shape, output: Shape| {
            let (nw, nb) = spec.param_sizes(input);
            let limit = (6.0 / spec.fan_in(input) as f64).sqrt();
            let weight = (0..nw)
                .map(|_| T::from(rng.gen_range(-limit..limit)).unwrap())
                .collect();
            Layer {
                spec,
                input,
                output,
                weight,
                bias: vec![T::zero(); nb],
            }
        };
        let mut branches = Vec::new();
        for (layers, shapes) in arch.branches.iter().zip(&r.branch_shapes) {
            branches.push(
                layers
                    .iter()
                    .enumerate()
                    .map(|(i, l)| make(*l, shapes[i], shapes[i + 1]))
                    .collect(),
            );
        }
        let multi = arch.branches.len() > 1;
        let mut head = Vec::new();
        for (i, l) in arch.head.iter().enumerate() {
            if multi && i == 0 {
                head.push(Layer {
                    spec: LayerSpec::Concat,
                    input: r.head_shapes[0],
                    output: r.head_shapes[0],
                    weight: Vec::new(),
                    bias: Vec::new(),
                });
                continue;
            }
            let j = i - usize::from(multi);
            head.push(make(*l, r.head_shapes[j], r.head_shapes[j + 1]));
        }
        Ok(ModelGraph {
            arch: arch.clone(),
            branches,
            head,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.layers().last().map(|l| l.output.numel()).unwrap_or(0)
    }

    pub fn layers(&self) -> impl Iterator<Item = &Layer<T>> {
        self.branches.iter().flatten().chain(self.head.iter())
    }

    pub fn count_params(&self) -> usize {
        self.layers().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    pub fn count_macs(&self) -> u64 {
        self.layers().map(|l| l.spec.macs(l.input, l.output)).sum()
    }

    /// Parameter tensors in canonical order (weight then bias per layer).
    pub fn params(&self) -> Vec<&Vec<T>> {
        self.layers()
            .filter(|l| l.spec.is_parametric())
            .flat_map(|l| [&l.weight, &l.bias])
            .collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Vec<T>> {
        self.branches
            .iter_mut()
            .flatten()
            .chain(self.head.iter_mut())
            .filter(|l| l.spec.is_parametric())
            .flat_map(|l| [&mut l.weight, &mut l.bias])
            .collect()
    }

    pub fn zero_grads(&self) -> Grads<T> {
        Grads {
            tensors: self
                .params()
                .iter()
                .map(|p| vec![T::zero(); p.len()])
                .collect(),
        }
    }

    /// Converts weights to another float type.
    pub fn cast<U: Scalar>(&self) -> ModelGraph<U> {
        let conv = |l: &Layer<T>| Layer {
            spec: l.spec,
            input: l.input,
            output: l.output,
            weight: l.weight.iter().map(|x| U::from(*x).unwrap()).collect(),
            bias: l.bias.iter().map(|x| U::from(*x).unwrap()).collect(),
        };
        ModelGraph {
            arch: self.arch.clone(),
            branches: self
                .branches
                .iter()
                .map(|b| b.iter().map(conv).collect())
                .collect(),
            head: self.head.iter().map(conv).collect(),
        }
    }

    pub fn forward(&self, inputs: &[&[T]]) -> Result<Trace<T>, NnError> {
        if inputs.len() != self.branches.len() {
            return Err(NnError::ShapeMismatch(format!(
                "model expects {} inputs, got {}",
                self.branches.len(),
                inputs.len()
            )));
        }
        let mut branches = Vec::with_capacity(inputs.len());
        for ((layers, x), shape) in self.branches.iter().zip(inputs).zip(&self.arch.inputs) {
            if x.len() != shape.numel() {
                return Err(NnError::ShapeMismatch(format!(
                    "input of shape {shape} needs {} values, got {}",
                    shape.numel(),
                    x.len()
                )));
            }
            let mut acts = Vec::with_capacity(layers.len() + 1);
            acts.push(x.to_vec());
            for l in layers {
                let y = l.forward(acts.last().unwrap());
                acts.push(y);
            }
            branches.push(acts);
        }
        let mut head = Vec::with_capacity(self.head.len() + 1);
        let start = if self.branches.len() > 1 {
            head.push(
                branches
                    .iter()
                    .flat_map(|b| b.last().unwrap().iter().copied())
                    .collect(),
            );
            1
        } else {
            head.push(branches[0].last().unwrap().clone());
            0
        };
        for l in &self.head[start..] {
            let y = l.forward(head.last().unwrap());
            head.push(y);
        }
        Ok(Trace { branches, head })
    }

    /// Class probabilities for one sample.
    pub fn predict(&self, inputs: &[&[T]]) -> Result<Vec<T>, NnError> {
        Ok(self.forward(inputs)?.head.pop().unwrap())
    }

    /// Accumulates parameter gradients given dL/d(output).
    pub fn backward(&self, trace: &Trace<T>, d_out: &[T], grads: &mut Grads<T>) {
        let mut slot = grads.tensors.len();
        let mut g = d_out.to_vec();
        let multi = self.branches.len() > 1;
        let start = usize::from(multi);
        for i in (start..self.head.len()).rev() {
            let l = &self.head[i];
            let j = i - start;
            g = self.layer_backward(
                l,
                &trace.head[j],
                &trace.head[j + 1],
                &g,
                true,
                &mut slot,
                grads,
            );
        }
        let mut offset = g.len();
        for b in (0..self.branches.len()).rev() {
            let acts = &trace.branches[b];
            let n_out = acts.last().unwrap().len();
            let mut gb = if multi {
                offset -= n_out;
                g[offset..offset + n_out].to_vec()
            } else {
                g.clone()
            };
            let layers = &self.branches[b];
            for i in (0..layers.len()).rev() {
                gb = self.layer_backward(
                    &layers[i],
                    &acts[i],
                    &acts[i + 1],
                    &gb,
                    i > 0,
                    &mut slot,
                    grads,
                );
            }
        }
        debug_assert_eq!(slot, 0);
    }

    #[allow(clippy::too_many_arguments)]
    fn layer_backward(
        &self,
        l: &Layer<T>,
        x: &[T],
        y: &[T],
        dy: &[T],
        need_dx: bool,
        slot: &mut usize,
        grads: &mut Grads<T>,
    ) -> Vec<T> {
        let mut dx = if need_dx {
            vec![T::zero(); x.len()]
        } else {
            Vec::new()
        };
        if l.spec.is_parametric() {
            *slot -= 2;
            let (a, b) = grads.tensors.split_at_mut(*slot + 1);
            l.backward(
                x,
                y,
                dy,
                need_dx.then_some(&mut dx[..]),
                Some((&mut a[*slot], &mut b[0])),
            );
        } else {
            l.backward(x, y, dy, need_dx.then_some(&mut dx[..]), None);
        }
        dx
    }

    /// ReLU on/off bits and pooling argmax positions of a trace. Two
    /// traces with equal patterns lie in the same linear region.
    pub fn activation_pattern(&self, trace: &Trace<T>) -> Vec<usize> {
        let mut out = Vec::new();
        let mut visit = |l: &Layer<T>, x: &[T]| match l.spec {
            LayerSpec::ReLU => out.extend(x.iter().map(|v| usize::from(*v > T::zero()))),
            LayerSpec::MaxPool2D { .. } | LayerSpec::GlobalMaxPool1D => {
                l.pool_argmax(x, |_, arg| out.push(arg))
            }
            _ => {}
        };
        for (layers, acts) in self.branches.iter().zip(&trace.branches) {
            for (i, l) in layers.iter().enumerate() {
                visit(l, &acts[i]);
            }
        }
        let start = usize::from(self.branches.len() > 1);
        for (i, l) in self.head.iter().enumerate().skip(start) {
            visit(l, &trace.head[i - start]);
        }
        out
    }
}

impl<T: Scalar> Layer<T> {
    pub fn forward(&self, x: &[T]) -> Vec<T> {
        match self.spec {
            LayerSpec::Conv2D {
                kernel,
                stride,
                padding,
                ..
            } => {
                let Shape::Spatial { h, w, c } = self.input else {
                    unreachable!()
                };
                let Shape::Spatial { h: oh, w: ow, c: f } = self.output else {
                    unreachable!()
                };
                let pt = pad_before(h, kernel, stride, padding);
                let pl = pad_before(w, kernel, stride, padding);
                let mut y = vec![T::zero(); oh * ow * f];
                for oy in 0..oh {
                    for ox in 0..ow {
                        let o = &mut y[(oy * ow + ox) * f..][..f];
                        o.copy_from_slice(&self.bias);
                        for ky in 0..kernel {
                            let Some(iy) = (oy * stride + ky).checked_sub(pt).filter(|&v| v < h)
                            else {
                                continue;
                            };
                            for kx in 0..kernel {
                                let Some(ix) =
                                    (ox * stride + kx).checked_sub(pl).filter(|&v| v < w)
                                else {
                                    continue;
                                };
                                let px = &x[(iy * w + ix) * c..][..c];
                                let wb = &self.weight[(ky * kernel + kx) * c * f..][..c * f];
                                for (ci, &xv) in px.iter().enumerate() {
                                    if xv == T::zero() {
                                        continue;
                                    }
                                    for (ov, &wv) in o.iter_mut().zip(&wb[ci * f..][..f]) {
                                        *ov += xv * wv;
                                    }
                                }
                            }
                        }
                    }
                }
                y
            }
            LayerSpec::FullyConnected { neurons } => {
                let mut y = self.bias.clone();
                for (i, &xv) in x.iter().enumerate() {
                    if xv == T::zero() {
                        continue;
                    }
                    for (yv, &wv) in y.iter_mut().zip(&self.weight[i * neurons..][..neurons]) {
                        *yv += xv * wv;
                    }
                }
                y
            }
            LayerSpec::Conv1DPointwise { filters } => {
                let Shape::Seq { len, c } = self.input else {
                    unreachable!()
                };
                let mut y = Vec::with_capacity(len * filters);
                for p in 0..len {
                    let mut o = self.bias.clone();
                    for (ci, &xv) in x[p * c..][..c].iter().enumerate() {
                        if xv == T::zero() {
                            continue;
                        }
                        for (ov, &wv) in o.iter_mut().zip(&self.weight[ci * filters..][..filters]) {
                            *ov += xv * wv;
                        }
                    }
                    y.extend(o);
                }
                y
            }
            LayerSpec::MaxPool2D { .. } | LayerSpec::GlobalMaxPool1D => {
                let mut y = vec![T::zero(); self.output.numel()];
                self.pool_argmax(x, |o, arg| y[o] = x[arg]);
                y
            }
            LayerSpec::ReLU => x.iter().map(|&v| v.max(T::zero())).collect(),
            LayerSpec::Softmax => super::loss::softmax(x),
            LayerSpec::Flatten | LayerSpec::Concat => x.to_vec(),
        }
    }

    /// Calls `f(output_index, input_index_of_max)` for every pooled output.
    /// Ties resolve to the first position in scan order.
    pub(crate) fn pool_argmax(&self, x: &[T], mut f: impl FnMut(usize, usize)) {
        match (self.spec, self.input, self.output) {
            (
                LayerSpec::MaxPool2D { kernel },
                Shape::Spatial { w, c, .. },
                Shape::Spatial { h: oh, w: ow, .. },
            ) => {
                for oy in 0..oh {
                    for ox in 0..ow {
                        for ci in 0..c {
                            let mut best = (oy * kernel * w + ox * kernel) * c + ci;
                            for ky in 0..kernel {
                                for kx in 0..kernel {
                                    let idx = ((oy * kernel + ky) * w + ox * kernel + kx) * c + ci;
                                    if x[idx] > x[best] {
                                        best = idx;
                                    }
                                }
                            }
                            f((oy * ow + ox) * c + ci, best);
                        }
                    }
                }
            }
            (LayerSpec::GlobalMaxPool1D, Shape::Seq { len, c }, _) => {
                for ci in 0..c {
                    let mut best = ci;
                    for p in 1..len {
                        if x[p * c + ci] > x[best] {
                            best = p * c + ci;
                        }
                    }
                    f(ci, best);
                }
            }
            _ => {}
        }
    }

    /// Accumulates into `dx` (if given) and into `(dw, db)`.
    pub fn backward(
        &self,
        x: &[T],
        y: &[T],
        dy: &[T],
        mut dx: Option<&mut [T]>,
        params: Option<(&mut Vec<T>, &mut Vec<T>)>,
    ) {
        match self.spec {
            LayerSpec::Conv2D {
                kernel,
                stride,
                padding,
                ..
            } => {
                let (dw, db) = params.expect("conv gradients");
                let Shape::Spatial { h, w, c } = self.input else {
                    unreachable!()
                };
                let Shape::Spatial { h: oh, w: ow, c: f } = self.output else {
                    unreachable!()
                };
                let pt = pad_before(h, kernel, stride, padding);
                let pl = pad_before(w, kernel, stride, padding);
                for oy in 0..oh {
                    for ox in 0..ow {
                        let go = &dy[(oy * ow + ox) * f..][..f];
                        if go.iter().all(|v| *v == T::zero()) {
                            continue;
                        }
                        for (b, &g) in db.iter_mut().zip(go) {
                            *b += g;
                        }
                        for ky in 0..kernel {
                            let Some(iy) = (oy * stride + ky).checked_sub(pt).filter(|&v| v < h)
                            else {
                                continue;
                            };
                            for kx in 0..kernel {
                                let Some(ix) =
                                    (ox * stride + kx).checked_sub(pl).filter(|&v| v < w)
                                else {
                                    continue;
                                };
                                let base = (iy * w + ix) * c;
                                let woff = (ky * kernel + kx) * c * f;
                                for ci in 0..c {
                                    let xv = x[base + ci];
                                    if xv != T::zero() {
                                        for (d, &g) in dw[woff + ci * f..][..f].iter_mut().zip(go) {
                                            *d += xv * g;
                                        }
                                    }
                                    if let Some(dx) = dx.as_deref_mut() {
                                        let wr = &self.weight[woff + ci * f..][..f];
                                        dx[base + ci] +=
                                            wr.iter().zip(go).map(|(&a, &b)| a * b).sum();
                                    }
                                }
                            }
                        }
                    }
                }
            }
            LayerSpec::FullyConnected { neurons } => {
                let (dw, db) = params.expect("fc gradients");
                for (b, &g) in db.iter_mut().zip(dy) {
                    *b += g;
                }
                for (i, &xv) in x.iter().enumerate() {
                    if xv != T::zero() {
                        for (d, &g) in dw[i * neurons..][..neurons].iter_mut().zip(dy) {
                            *d += xv * g;
                        }
                    }
                    if let Some(dx) = dx.as_deref_mut() {
                        let wr = &self.weight[i * neurons..][..neurons];
                        dx[i] += wr.iter().zip(dy).map(|(&a, &b)| a * b).sum();
                    }
                }
            }
            LayerSpec::Conv1DPointwise { filters } => {
                let (dw, db) = params.expect("pointwise gradients");
                let Shape::Seq { len, c } = self.input else {
                    unreachable!()
                };
                for p in 0..len {
                    let go = &dy[p * filters..][..filters];
                    for (b, &g) in db.iter_mut().zip(go) {
                        *b += g;
                    }
                    for ci in 0..c {
                        let xv = x[p * c + ci];
                        if xv != T::zero() {
                            for (d, &g) in dw[ci * filters..][..filters].iter_mut().zip(go) {
                                *d += xv * g;
                            }
                        }
                        if let Some(dx) = dx.as_deref_mut() {
                            let wr = &self.weight[ci * filters..][..filters];
                            dx[p * c + ci] += wr.iter().zip(go).map(|(&a, &b)| a * b).sum();
                        }
                    }
                }
            }
            LayerSpec::MaxPool2D { .. } | LayerSpec::GlobalMaxPool1D => {
                if let Some(dx) = dx {
                    self.pool_argmax(x, |o, arg| dx[arg] += dy[o]);
                }
            }
            LayerSpec::ReLU => {
                if let Some(dx) = dx {
                    for ((d, &g), &xv) in dx.iter_mut().zip(dy).zip(x) {
                        if xv > T::zero() {
                            *d += g;
                        }
                    }
                }
            }
            LayerSpec::Softmax => {
                if let Some(dx) = dx {
                    let dot: T = y.iter().zip(dy).map(|(&p, &g)| p * g).sum();
                    for ((d, &g), &p) in dx.iter_mut().zip(dy).zip(y) {
                        *d += p * (g - dot);
                    }
                }
            }
            LayerSpec::Flatten | LayerSpec::Concat => {
                if let Some(dx) = dx {
                    for (d, &g) in dx.iter_mut().zip(dy) {
                        *d += g;
                    }
                }
            }
        }
    }
}
