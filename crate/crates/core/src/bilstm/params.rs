use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, Uniform};

use crate::error::{Error, Result};

/// Number of output classes: 0 = not a boundary, 1 = boundary.
pub const NUM_CLASSES: usize = 2;

/// Gate blocks, in the column order they are stacked in `w_x`, `w_h` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input,
    Forget,
    Cell,
    Output,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Input, Gate::Forget, Gate::Cell, Gate::Output];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkShape {
    pub input_size: usize,
    pub hidden_size: usize,
    pub num_layers: usize,
}

impl NetworkShape {
    pub fn layer_input(&self, layer: usize) -> usize {
        if layer == 0 {
            self.input_size
        } else {
            2 * self.hidden_size
        }
    }

    fn validate(&self) -> Result<()> {
        if self.input_size == 0 || self.hidden_size == 0 || self.num_layers == 0 {
            return Err(Error::Config(format!("degenerate network shape {self:?}")));
        }
        Ok(())
    }
}

/// One direction of one layer.
///
/// The four gates are stacked column-wise in [`Gate`] order: `w_x` is
/// `input × 4·hidden`, `w_h` is `hidden × 4·hidden` and `b` has `4·hidden`
/// entries, so pre-activations are `x·w_x + h·w_h + b` for row vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionParams {
    pub w_x: Array2<f64>,
    pub w_h: Array2<f64>,
    pub b: Array1<f64>,
}

impl DirectionParams {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        DirectionParams {
            w_x: Array2::zeros((input_size, 4 * hidden_size)),
            w_h: Array2::zeros((hidden_size, 4 * hidden_size)),
            b: Array1::zeros(4 * hidden_size),
        }
    }

    pub fn input_size(&self) -> usize {
        self.w_x.nrows()
    }

    pub fn hidden_size(&self) -> usize {
        self.w_h.nrows()
    }

    /// `W_x·` for one gate, `input × hidden`.
    pub fn input_weights(&self, gate: Gate) -> ArrayView2<'_, f64> {
        let h = self.hidden_size();
        self.w_x.slice(s![.., gate.index() * h..(gate.index() + 1) * h])
    }

    /// `W_h·` for one gate, `hidden × hidden`.
    pub fn recurrent_weights(&self, gate: Gate) -> ArrayView2<'_, f64> {
        let h = self.hidden_size();
        self.w_h.slice(s![.., gate.index() * h..(gate.index() + 1) * h])
    }

    pub fn bias(&self, gate: Gate) -> ArrayView1<'_, f64> {
        let h = self.hidden_size();
        self.b.slice(s![gate.index() * h..(gate.index() + 1) * h])
    }

    pub(crate) fn check(&self, what: &'static str) -> Result<()> {
        let h = self.hidden_size();
        let dims = [
            (self.w_x.ncols(), 4 * h),
            (self.w_h.ncols(), 4 * h),
            (self.b.len(), 4 * h),
        ];
        for (actual, expected) in dims {
            if actual != expected {
                return Err(Error::Dimension {
                    what,
                    expected,
                    actual,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayerParams {
    pub forward: DirectionParams,
    pub backward: DirectionParams,
}

/// Every trainable tensor of the stacked bidirectional network.
///
/// Logits are `y_t = h→_t·w_fwd_y + h←_t·w_bwd_y + b_y` from the top layer;
/// the two-column head doubles as the softmax parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BilstmParams {
    pub layers: Vec<LstmLayerParams>,
    pub w_fwd_y: Array2<f64>,
    pub w_bwd_y: Array2<f64>,
    pub b_y: Array1<f64>,
}

impl BilstmParams {
    pub fn zeros(shape: NetworkShape) -> Result<Self> {
        shape.validate()?;
        let h = shape.hidden_size;
        let layers = (0..shape.num_layers)
            .map(|l| LstmLayerParams {
                forward: DirectionParams::zeros(shape.layer_input(l), h),
                backward: DirectionParams::zeros(shape.layer_input(l), h),
            })
            .collect();
        Ok(BilstmParams {
            layers,
            w_fwd_y: Array2::zeros((h, NUM_CLASSES)),
            w_bwd_y: Array2::zeros((h, NUM_CLASSES)),
            b_y: Array1::zeros(NUM_CLASSES),
        })
    }

    /// Weights uniform in `±1/√fan_in` (fan-in = rows of the matrix), gate
    /// biases zero except the forget gate at 1, output bias zero.
    pub fn init<R: Rng + ?Sized>(shape: NetworkShape, rng: &mut R) -> Result<Self> {
        let mut p = Self::zeros(shape)?;
        let h = shape.hidden_size;
        let fill = |m: &mut Array2<f64>, rng: &mut R| {
            let s = 1.0 / (m.nrows() as f64).sqrt();
            let dist = Uniform::new_inclusive(-s, s).expect("finite bound");
            m.iter_mut().for_each(|w| *w = dist.sample(rng));
        };
        for layer in &mut p.layers {
            for dir in [&mut layer.forward, &mut layer.backward] {
                fill(&mut dir.w_x, rng);
                fill(&mut dir.w_h, rng);
                dir.b.slice_mut(s![h..2 * h]).fill(1.0);
            }
        }
        fill(&mut p.w_fwd_y, rng);
        fill(&mut p.w_bwd_y, rng);
        Ok(p)
    }

    pub fn shape(&self) -> NetworkShape {
        NetworkShape {
            input_size: self.layers[0].forward.input_size(),
            hidden_size: self.w_fwd_y.nrows(),
            num_layers: self.layers.len(),
        }
    }

    /// Same shapes, all zeros.
    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.shape()).expect("shape came from valid params")
    }

    /// Rejects inconsistent tensor shapes.
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Config("network has no layers".into()));
        }
        let shape = self.shape();
        for (l, layer) in self.layers.iter().enumerate() {
            for dir in [&layer.forward, &layer.backward] {
                dir.check("lstm gate tensors")?;
                if dir.input_size() != shape.layer_input(l) {
                    return Err(Error::Dimension {
                        what: "layer input size",
                        expected: shape.layer_input(l),
                        actual: dir.input_size(),
                    });
                }
                if dir.hidden_size() != shape.hidden_size {
                    return Err(Error::Dimension {
                        what: "layer hidden size",
                        expected: shape.hidden_size,
                        actual: dir.hidden_size(),
                    });
                }
            }
        }
        for (m, what) in [(&self.w_fwd_y, "forward output head"), (&self.w_bwd_y, "backward output head")] {
            if m.dim() != (shape.hidden_size, NUM_CLASSES) {
                return Err(Error::Dimension {
                    what,
                    expected: shape.hidden_size * NUM_CLASSES,
                    actual: m.len(),
                });
            }
        }
        if self.b_y.len() != NUM_CLASSES {
            return Err(Error::Dimension {
                what: "output bias",
                expected: NUM_CLASSES,
                actual: self.b_y.len(),
            });
        }
        Ok(())
    }

    /// Tensor names in storage order.
    pub fn tensor_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for l in 0..self.layers.len() {
            for dir in ["fwd", "bwd"] {
                for t in ["w_x", "w_h", "b"] {
                    names.push(format!("layer{l}.{dir}.{t}"));
                }
            }
        }
        names.extend(["head.w_fwd_y", "head.w_bwd_y", "head.b_y"].map(String::from));
        names
    }

    /// `(rows, cols)` of every tensor in storage order; vectors are `(1, n)`.
    pub fn tensor_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::new();
        for layer in &self.layers {
            for dir in [&layer.forward, &layer.backward] {
                dims.push(dir.w_x.dim());
                dims.push(dir.w_h.dim());
                dims.push((1, dir.b.len()));
            }
        }
        dims.push(self.w_fwd_y.dim());
        dims.push(self.w_bwd_y.dim());
        dims.push((1, self.b_y.len()));
        dims
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for layer in &self.layers {
            for dir in [&layer.forward, &layer.backward] {
                out.push(dir.w_x.as_slice().expect("standard layout"));
                out.push(dir.w_h.as_slice().expect("standard layout"));
                out.push(dir.b.as_slice().expect("standard layout"));
            }
        }
        out.push(self.w_fwd_y.as_slice().expect("standard layout"));
        out.push(self.w_bwd_y.as_slice().expect("standard layout"));
        out.push(self.b_y.as_slice().expect("standard layout"));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.layers {
            for dir in [&mut layer.forward, &mut layer.backward] {
                out.push(dir.w_x.as_slice_mut().expect("standard layout"));
                out.push(dir.w_h.as_slice_mut().expect("standard layout"));
                out.push(dir.b.as_slice_mut().expect("standard layout"));
            }
        }
        out.push(self.w_fwd_y.as_slice_mut().expect("standard layout"));
        out.push(self.w_bwd_y.as_slice_mut().expect("standard layout"));
        out.push(self.b_y.as_slice_mut().expect("standard layout"));
        out
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    /// `self += other * k`.
    pub fn add_scaled(&mut self, other: &BilstmParams, k: f64) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            dst.iter_mut().zip(src).for_each(|(d, s)| *d += k * s);
        }
    }

    pub fn scale(&mut self, k: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= k);
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Exchanges forward and backward parameters in every layer and the head.
    ///
    /// Layers above the first read `[h→, h←]`, so their input-weight rows are
    /// exchanged between the two halves as well. The swapped network applied
    /// to a reversed sequence yields the reversed logits.
    pub fn swap_directions(&self) -> Self {
        let mut p = self.clone();
        let h = self.shape().hidden_size;
        for (l, layer) in p.layers.iter_mut().enumerate() {
            std::mem::swap(&mut layer.forward, &mut layer.backward);
            if l > 0 {
                for dir in [&mut layer.forward, &mut layer.backward] {
                    let top = dir.w_x.slice(s![..h, ..]).to_owned();
                    let bottom = dir.w_x.slice(s![h.., ..]).to_owned();
                    dir.w_x.slice_mut(s![..h, ..]).assign(&bottom);
                    dir.w_x.slice_mut(s![h.., ..]).assign(&top);
                }
            }
        }
        std::mem::swap(&mut p.w_fwd_y, &mut p.w_bwd_y);
        p
    }
}
