use alloc::vec;
use alloc::vec::Vec;

use super::conv::{bias_grad, conv_raw, conv_transpose_raw, same_padding, ConvWeights, Geometry};
use super::loss::{loss_and_grad, LossKind};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::image::{to_luminance, Image};
use crate::posmap::{PositionMap, WeightMask};
use crate::rng::{seeded, uniform};

/// Kernel size of every non-projection layer.
pub const KERNEL: usize = 4;

/// Starting value of every bias. Being nonzero, it keeps a unit whose
/// inputs are all zero off the ReLU kink.
pub const INITIAL_BIAS: f64 = 0.01;

/// Output channel count and stride of one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stage {
    pub channels: usize,
    pub stride: usize,
}

const fn st(channels: usize, stride: usize) -> Stage {
    Stage { channels, stride }
}

/// Architecture: a stem convolution, residual blocks that may downsample,
/// and transposed-convolution blocks back up to the input size. The last
/// decoder block has 3 channels and no activation.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    /// Side length of the square input and of the output position map.
    pub input_size: usize,
    pub in_channels: usize,
    pub kernel: usize,
    pub stem_channels: usize,
    pub encoder: Vec<Stage>,
    pub decoder: Vec<Stage>,
}

impl NetworkSpec {
    /// 32×32 input, 2 residual and 5 transposed blocks.
    pub fn desk_scale() -> Self {
        Self {
            input_size: 32,
            in_channels: 3,
            kernel: KERNEL,
            stem_channels: 8,
            encoder: vec![st(16, 2), st(32, 2)],
            decoder: vec![st(32, 1), st(16, 2), st(16, 1), st(8, 2), st(3, 1)],
        }
    }

    /// The desk-scale layout at 8×8 with 2 to 4 channels per layer, small
    /// enough for exhaustive finite-difference checks.
    pub fn tiny() -> Self {
        Self {
            input_size: 8,
            in_channels: 3,
            kernel: KERNEL,
            stem_channels: 2,
            encoder: vec![st(3, 2), st(4, 2)],
            decoder: vec![st(4, 1), st(3, 2), st(3, 1), st(2, 2), st(3, 1)],
        }
    }

    /// 256×256 input, 10 residual and 17 transposed blocks. Constructible
    /// but far too slow to train here.
    pub fn paper_scale() -> Self {
        Self {
            input_size: 256,
            in_channels: 3,
            kernel: KERNEL,
            stem_channels: 16,
            encoder: vec![
                st(32, 2),
                st(32, 1),
                st(64, 2),
                st(64, 1),
                st(128, 2),
                st(128, 1),
                st(256, 2),
                st(256, 1),
                st(512, 2),
                st(512, 1),
            ],
            decoder: vec![
                st(512, 1),
                st(256, 2),
                st(256, 1),
                st(256, 1),
                st(128, 2),
                st(128, 1),
                st(128, 1),
                st(64, 2),
                st(64, 1),
                st(64, 1),
                st(32, 2),
                st(32, 1),
                st(16, 2),
                st(16, 1),
                st(3, 1),
                st(3, 1),
                st(3, 1),
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_size == 0 || self.in_channels == 0 || self.stem_channels == 0 {
            return Err(Error::InvalidSpec(
                "sizes and channel counts must be positive",
            ));
        }
        if self.in_channels != 1 && self.in_channels != 3 {
            return Err(Error::InvalidSpec("input must have 1 or 3 channels"));
        }
        if self.kernel == 0 {
            return Err(Error::InvalidSpec("kernel must be positive"));
        }
        if self.decoder.is_empty() {
            return Err(Error::InvalidSpec("decoder needs at least one block"));
        }
        for s in self.encoder.iter().chain(&self.decoder) {
            if s.channels == 0 || !(s.stride == 1 || s.stride == 2) {
                return Err(Error::InvalidSpec(
                    "every block needs channels > 0 and stride 1 or 2",
                ));
            }
        }
        if self.decoder.last().map(|s| s.channels) != Some(3) {
            return Err(Error::InvalidSpec(
                "last decoder block must output 3 channels",
            ));
        }
        let mut side = self.input_size;
        for s in &self.encoder {
            side = same_padding(side, self.kernel, s.stride).0;
        }
        for s in &self.decoder {
            side *= s.stride;
        }
        if side != self.input_size {
            return Err(Error::InvalidSpec(
                "decoder output size differs from the input size",
            ));
        }
        Ok(())
    }

    fn plan(&self) -> (Vec<Block>, usize) {
        let mut offset = 0;
        let mut layer = |cin: usize, cout: usize, k: usize, stride: usize| {
            let l = Layer {
                cin,
                cout,
                k,
                stride,
                w: offset,
                b: offset + cin * cout * k * k,
            };
            offset = l.b + cout;
            l
        };
        let mut blocks = Vec::new();
        let k = self.kernel;
        blocks.push(Block::Stem(layer(
            self.in_channels,
            self.stem_channels,
            k,
            1,
        )));
        let mut c = self.stem_channels;
        for s in &self.encoder {
            let conv1 = layer(c, s.channels, k, s.stride);
            let conv2 = layer(s.channels, s.channels, k, 1);
            let proj =
                (c != s.channels || s.stride != 1).then(|| layer(c, s.channels, 1, s.stride));
            blocks.push(Block::Residual { conv1, conv2, proj });
            c = s.channels;
        }
        let last = self.decoder.len() - 1;
        for (i, s) in self.decoder.iter().enumerate() {
            blocks.push(Block::Up {
                layer: layer(c, s.channels, k, s.stride),
                relu: i != last,
            });
            c = s.channels;
        }
        (blocks, offset)
    }

    /// Total number of weights and biases.
    pub fn param_count(&self) -> usize {
        self.plan().1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Layer {
    cin: usize,
    cout: usize,
    k: usize,
    stride: usize,
    /// Offsets of the taps and the bias in the flat parameter vector.
    w: usize,
    b: usize,
}

impl Layer {
    fn taps<'a>(&self, p: &'a [f64]) -> &'a [f64] {
        &p[self.w..self.b]
    }

    fn bias<'a>(&self, p: &'a [f64]) -> &'a [f64] {
        &p[self.b..self.b + self.cout]
    }

    fn fan_sum(&self) -> f64 {
        ((self.cin + self.cout) * self.k * self.k) as f64
    }

    fn conv(&self, p: &[f64], x: &Tensor) -> Tensor {
        conv_raw(
            x,
            self.taps(p),
            self.bias(p),
            self.cout,
            self.k,
            self.stride,
        )
    }

    fn conv_transpose(&self, p: &[f64], x: &Tensor) -> Tensor {
        conv_transpose_raw(
            x,
            self.taps(p),
            self.bias(p),
            self.cout,
            self.k,
            self.stride,
        )
    }

    /// Accumulates parameter gradients into `grad` and returns the input
    /// gradient of a convolution given its input `x` and output gradient `dy`.
    fn conv_backward(&self, p: &[f64], x: &Tensor, dy: &[f64], grad: &mut [f64]) -> Vec<f64> {
        let (_, h, w) = x.dims3().expect("cached rank-3 tensor");
        let g = Geometry::conv(self.cin, self.cout, self.k, self.stride, h, w);
        let mut dx = vec![0.0; x.data().len()];
        g.scatter(dy, self.taps(p), &mut dx);
        g.correlate(dy, x.data(), &mut grad[self.w..self.b]);
        bias_grad(dy, &mut grad[self.b..self.b + self.cout]);
        dx
    }

    fn conv_transpose_backward(
        &self,
        p: &[f64],
        x: &Tensor,
        dy: &[f64],
        grad: &mut [f64],
    ) -> Vec<f64> {
        let (_, h, w) = x.dims3().expect("cached rank-3 tensor");
        let g = Geometry::transposed(self.cin, self.cout, self.k, self.stride, h, w);
        let mut dx = vec![0.0; x.data().len()];
        g.gather(dy, self.taps(p), &mut dx);
        g.correlate(x.data(), dy, &mut grad[self.w..self.b]);
        bias_grad(dy, &mut grad[self.b..self.b + self.cout]);
        dx
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Block {
    Stem(Layer),
    Residual {
        conv1: Layer,
        conv2: Layer,
        proj: Option<Layer>,
    },
    Up {
        layer: Layer,
        relu: bool,
    },
}

/// Activations kept for the backward pass.
enum Saved {
    Stem { x: Tensor, out: Tensor },
    Residual { x: Tensor, hidden: Tensor },
    Up { x: Tensor, out: Option<Tensor> },
}

fn relu(mut t: Tensor) -> Tensor {
    for v in t.data_mut() {
        *v = v.max(0.0);
    }
    t
}

/// Zeroes `grad` where the activation `out` was clamped.
fn relu_backward(out: &Tensor, grad: &mut [f64]) {
    for (g, &o) in grad.iter_mut().zip(out.data()) {
        if o <= 0.0 {
            *g = 0.0;
        }
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// Parameter gradients of the loss together with the loss itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub loss: f64,
    pub params: Vec<f64>,
}

/// A position-map regressor: its spec and a flat parameter vector holding,
/// layer by layer, taps then biases. Residual blocks store `conv1`, `conv2`
/// and, when the shape changes, a 1×1 projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    params: Vec<f64>,
    blocks: Vec<Block>,
}

impl Network {
    /// Uniform `±sqrt(6 / (fan_in + fan_out))` taps and [`INITIAL_BIAS`].
    pub fn new(spec: NetworkSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let (blocks, n) = spec.plan();
        let mut params = vec![0.0; n];
        let mut rng = seeded(seed);
        let mut init = |l: &Layer| {
            let a = libm::sqrt(6.0 / l.fan_sum());
            for p in &mut params[l.w..l.b] {
                *p = uniform(&mut rng, -a, a);
            }
            params[l.b..l.b + l.cout].fill(INITIAL_BIAS);
        };
        for b in &blocks {
            match b {
                Block::Stem(l) | Block::Up { layer: l, .. } => init(l),
                Block::Residual { conv1, conv2, proj } => {
                    init(conv1);
                    init(conv2);
                    if let Some(p) = proj {
                        init(p);
                    }
                }
            }
        }
        Ok(Self {
            spec,
            params,
            blocks,
        })
    }

    pub fn from_params(spec: NetworkSpec, params: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        let (blocks, n) = spec.plan();
        if params.len() != n {
            return Err(Error::BufferLength {
                expected: n,
                actual: params.len(),
            });
        }
        if let Some(index) = params.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            spec,
            params,
            blocks,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Replaces the parameters, keeping the architecture.
    pub fn set_params(&mut self, params: Vec<f64>) -> Result<()> {
        *self = Self::from_params(self.spec.clone(), params)?;
        Ok(())
    }

    pub(crate) fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Pixel coordinates are predicted as fractions of the input side.
    pub fn output_scale(&self) -> f64 {
        self.spec.input_size as f64
    }

    /// Converts an image of the spec's size to the network input tensor.
    pub fn input_tensor(&self, img: &Image) -> Result<Tensor> {
        let s = self.spec.input_size;
        if img.width() != s || img.height() != s {
            return Err(Error::ShapeMismatch(
                "image size differs from the network input size",
            ));
        }
        let img = match (self.spec.in_channels, img.channels()) {
            (3, 1) => img.to_rgb(),
            (1, 3) => to_luminance(img),
            _ => img.clone(),
        };
        Ok(Tensor::from_parts(
            [self.spec.in_channels, s, s],
            img.into_data(),
        ))
    }

    fn run(&self, x: Tensor, mut save: Option<&mut Vec<Saved>>) -> Tensor {
        let p = &self.params;
        let mut x = x;
        for b in &self.blocks {
            x = match b {
                Block::Stem(l) => {
                    let out = relu(l.conv(p, &x));
                    if let Some(s) = save.as_deref_mut() {
                        s.push(Saved::Stem {
                            x,
                            out: out.clone(),
                        });
                    }
                    out
                }
                Block::Residual { conv1, conv2, proj } => {
                    let hidden = relu(conv1.conv(p, &x));
                    let mut out = conv2.conv(p, &hidden);
                    match proj {
                        Some(pr) => add_into(out.data_mut(), pr.conv(p, &x).data()),
                        None => add_into(out.data_mut(), x.data()),
                    }
                    if let Some(s) = save.as_deref_mut() {
                        s.push(Saved::Residual { x, hidden });
                    }
                    out
                }
                Block::Up { layer, relu: act } => {
                    let mut out = layer.conv_transpose(p, &x);
                    if *act {
                        out = relu(out);
                    }
                    if let Some(s) = save.as_deref_mut() {
                        let kept = act.then(|| out.clone());
                        s.push(Saved::Up { x, out: kept });
                    }
                    out
                }
            };
        }
        x
    }

    /// Raw `[3, s, s]` network output, before scaling to pixel units.
    pub fn forward_tensor(&self, x: &Tensor) -> Result<Tensor> {
        let (c, h, w) = x.dims3()?;
        let s = self.spec.input_size;
        if c != self.spec.in_channels || h != s || w != s {
            return Err(Error::ShapeMismatch(
                "input tensor does not match the network spec",
            ));
        }
        Ok(self.run(x.clone(), None))
    }

    /// Predicts the position map of `img`, in input pixel units.
    pub fn forward(&self, img: &Image) -> Result<PositionMap> {
        let x = self.input_tensor(img)?;
        let raw = self.run(x, None);
        let s = self.spec.input_size;
        let scale = self.output_scale();
        PositionMap::from_planar(
            s,
            s,
            raw.into_data().into_iter().map(|v| v * scale).collect(),
        )
    }

    /// Sign pattern of every ReLU input for `img`. Finite-difference checks
    /// use it to spot perturbations that cross a kink.
    pub fn activation_pattern(&self, img: &Image) -> Result<Vec<bool>> {
        let mut saved = Vec::new();
        self.run(self.input_tensor(img)?, Some(&mut saved));
        let mut pattern = Vec::new();
        for s in &saved {
            let t = match s {
                Saved::Stem { out, .. } => out,
                Saved::Residual { hidden, .. } => hidden,
                Saved::Up { out: Some(out), .. } => out,
                Saved::Up { out: None, .. } => continue,
            };
            pattern.extend(t.data().iter().map(|&v| v > 0.0));
        }
        Ok(pattern)
    }

    /// Loss of the prediction for `img` against `target` and its gradient
    /// with respect to every parameter.
    pub fn loss_and_gradient(
        &self,
        img: &Image,
        target: &PositionMap,
        mask: &WeightMask,
        kind: LossKind,
    ) -> Result<Gradients> {
        let mut grad = vec![0.0; self.params.len()];
        let loss = self.accumulate_gradient(img, target, mask, kind, &mut grad)?;
        Ok(Gradients { loss, params: grad })
    }

    /// Adds the parameter gradient for one sample into `grad` and returns the
    /// sample's loss.
    pub(crate) fn accumulate_gradient(
        &self,
        img: &Image,
        target: &PositionMap,
        mask: &WeightMask,
        kind: LossKind,
        grad: &mut [f64],
    ) -> Result<f64> {
        let s = self.spec.input_size;
        if target.width() != s || target.height() != s {
            return Err(Error::ShapeMismatch(
                "target size differs from the network output size",
            ));
        }
        let mut saved = Vec::with_capacity(self.blocks.len());
        let raw = self.run(self.input_tensor(img)?, Some(&mut saved));
        let scale = self.output_scale();
        let pred = PositionMap::from_planar(s, s, raw.data().iter().map(|v| v * scale).collect())?;
        let (loss, dpos) = loss_and_grad(&pred, target, mask, kind)?;
        let mut dy: Vec<f64> = dpos.into_iter().map(|g| g * scale).collect();

        let p = &self.params;
        for (b, sv) in self.blocks.iter().zip(&saved).rev() {
            dy = match (b, sv) {
                (Block::Up { layer, .. }, Saved::Up { x, out }) => {
                    if let Some(out) = out {
                        relu_backward(out, &mut dy);
                    }
                    layer.conv_transpose_backward(p, x, &dy, grad)
                }
                (Block::Residual { conv1, conv2, proj }, Saved::Residual { x, hidden }) => {
                    let mut dh = conv2.conv_backward(p, hidden, &dy, grad);
                    relu_backward(hidden, &mut dh);
                    let mut dx = conv1.conv_backward(p, x, &dh, grad);
                    match proj {
                        Some(pr) => add_into(&mut dx, &pr.conv_backward(p, x, &dy, grad)),
                        None => add_into(&mut dx, &dy),
                    }
                    dx
                }
                (Block::Stem(l), Saved::Stem { x, out }) => {
                    relu_backward(out, &mut dy);
                    l.conv_backward(p, x, &dy, grad)
                }
                _ => unreachable!("saved activations follow the block list"),
            };
        }
        Ok(loss)
    }
}

/// Reverse-mode gradient of the Euclidean weighted loss.
pub fn backward(
    net: &Network,
    img: &Image,
    target: &PositionMap,
    mask: &WeightMask,
) -> Result<Gradients> {
    net.loss_and_gradient(img, target, mask, LossKind::Euclidean)
}

/// Weights of one residual block.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualWeights {
    pub conv1: ConvWeights,
    pub conv2: ConvWeights,
    /// 1×1 skip projection; required when the block changes channel count
    /// or stride.
    pub projection: Option<ConvWeights>,
}

/// `conv2(relu(conv1(x, stride))) + skip(x)`, the skip being `x` itself or
/// its 1×1 strided projection.
pub fn residual_block_forward(
    x: &Tensor,
    weights: &ResidualWeights,
    stride: usize,
) -> Result<Tensor> {
    use super::conv::conv_forward;
    let (c, _, _) = x.dims3()?;
    let w = weights;
    if w.conv2.in_channels != w.conv1.out_channels {
        return Err(Error::ShapeMismatch("conv2 must read conv1's channels"));
    }
    let hidden = relu(conv_forward(x, &w.conv1, stride)?);
    let mut out = conv_forward(&hidden, &w.conv2, 1)?;
    match &w.projection {
        Some(p) => {
            if p.kernel != 1 {
                return Err(Error::ShapeMismatch("projection must be 1x1"));
            }
            let skip = conv_forward(x, p, stride)?;
            if skip.shape() != out.shape() {
                return Err(Error::ShapeMismatch(
                    "projection output differs from the block output",
                ));
            }
            add_into(out.data_mut(), skip.data());
        }
        None => {
            if stride != 1 || c != w.conv2.out_channels {
                return Err(Error::ShapeMismatch(
                    "identity skip needs stride 1 and equal channels",
                ));
            }
            add_into(out.data_mut(), x.data());
        }
    }
    Ok(out)
}
