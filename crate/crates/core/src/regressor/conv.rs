//! Strided 2-D convolution and its adjoint.
//!
//! Padding follows the "same" convention: a stride-`s` convolution maps a
//! side of length `n` to `ceil(n / s)` and pads `total / 2` zeros before the
//! first sample, where `total = max((out - 1)·s + k - n, 0)`. For kernel 4
//! this is one zero before and one after at stride 2, one before and two
//! after at stride 1. The transposed convolution is the exact adjoint of the
//! convolution that maps its output size back to its input size.

use alloc::vec;
use alloc::vec::Vec;

use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Output length and leading padding of a "same" convolution.
pub fn same_padding(len: usize, kernel: usize, stride: usize) -> (usize, usize) {
    let out = len.div_ceil(stride);
    let total = ((out - 1) * stride + kernel).saturating_sub(len);
    (out, total / 2)
}

/// Filter bank plus bias. For a convolution the taps are laid out
/// `[out, in, k, k]`; for a transposed convolution `[in, out, k, k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvWeights {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub taps: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ConvWeights {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        taps: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        if in_channels == 0 || out_channels == 0 || kernel == 0 {
            return Err(Error::ShapeMismatch(
                "weights need nonzero channels and kernel",
            ));
        }
        if taps.len() != in_channels * out_channels * kernel * kernel || bias.len() != out_channels
        {
            return Err(Error::ShapeMismatch(
                "tap or bias count does not match the declared shape",
            ));
        }
        Ok(Self {
            in_channels,
            out_channels,
            kernel,
            taps,
            bias,
        })
    }

    pub fn zeros(in_channels: usize, out_channels: usize, kernel: usize) -> Self {
        Self {
            in_channels,
            out_channels,
            kernel,
            taps: vec![0.0; in_channels * out_channels * kernel * kernel],
            bias: vec![0.0; out_channels],
        }
    }
}

fn check_stride(stride: usize) -> Result<()> {
    if stride == 1 || stride == 2 {
        Ok(())
    } else {
        Err(Error::ShapeMismatch("stride must be 1 or 2"))
    }
}

/// Range of output indices `o` with `o·s + t - pad` inside `[0, len)`.
#[inline]
fn valid_range(out: usize, len: usize, stride: usize, tap: usize, pad: usize) -> (usize, usize) {
    let lo = if pad > tap {
        (pad - tap).div_ceil(stride)
    } else {
        0
    };
    let hi_excl = if len + pad > tap {
        ((len + pad - tap - 1) / stride + 1).min(out)
    } else {
        0
    };
    (lo, hi_excl.max(lo))
}

pub(crate) struct Geometry {
    pub cin: usize,
    pub cout: usize,
    pub k: usize,
    pub stride: usize,
    /// Spatial size of the dense (convolution input) side.
    pub big: (usize, usize),
    /// Spatial size of the strided (convolution output) side.
    pub small: (usize, usize),
    pub pad: (usize, usize),
}

impl Geometry {
    /// Geometry of a convolution reading `big` and writing `small`.
    pub fn conv(cin: usize, cout: usize, k: usize, stride: usize, h: usize, w: usize) -> Self {
        let (oh, py) = same_padding(h, k, stride);
        let (ow, px) = same_padding(w, k, stride);
        Self {
            cin,
            cout,
            k,
            stride,
            big: (h, w),
            small: (oh, ow),
            pad: (py, px),
        }
    }

    /// Geometry of the convolution whose adjoint maps `h × w` to
    /// `h·s × w·s`; `cin`/`cout` are the transposed layer's channels.
    pub fn transposed(
        cin: usize,
        cout: usize,
        k: usize,
        stride: usize,
        h: usize,
        w: usize,
    ) -> Self {
        let g = Self::conv(cout, cin, k, stride, h * stride, w * stride);
        debug_assert_eq!(g.small, (h, w));
        g
    }

    /// Small-side row and column ranges that tap `t` keeps inside the big
    /// side, plus the tap's row and column.
    #[inline]
    fn spans(&self, t: usize) -> ((usize, usize), (usize, usize), usize, usize) {
        let (ky, kx) = (t / self.k, t % self.k);
        let ry = valid_range(self.small.0, self.big.0, self.stride, ky, self.pad.0);
        let rx = valid_range(self.small.1, self.big.1, self.stride, kx, self.pad.1);
        (ry, rx, ky, kx)
    }

    fn patch_len(&self) -> usize {
        self.cin * self.k * self.k
    }

    fn small_len(&self) -> usize {
        self.small.0 * self.small.1
    }

    /// Unfolds the big side into a `[cin·k·k, small pixels]` matrix whose
    /// row `b·k² + t` holds, for every small pixel, the big sample under tap
    /// `t` of channel `b` (zero in the padding).
    fn im2col(&self, big: &[f64]) -> Vec<f64> {
        let (h, w) = self.big;
        let (_, ow) = self.small;
        let p = self.small_len();
        let kk = self.k * self.k;
        let mut cols = vec![0.0; self.patch_len() * p];
        for b in 0..self.cin {
            for t in 0..kk {
                let ((y0, y1), (x0, x1), ky, kx) = self.spans(t);
                if x1 <= x0 {
                    continue;
                }
                let row = &mut cols[(b * kk + t) * p..(b * kk + t + 1) * p];
                for oy in y0..y1 {
                    let iy = oy * self.stride + ky - self.pad.0;
                    let src = big[(b * h + iy) * w + x0 * self.stride + kx - self.pad.1..]
                        .iter()
                        .step_by(self.stride);
                    for (d, &v) in row[oy * ow + x0..oy * ow + x1].iter_mut().zip(src) {
                        *d = v;
                    }
                }
            }
        }
        cols
    }

    /// Adjoint of [`Geometry::im2col`]: adds every column entry back onto
    /// the big sample it was read from.
    fn col2im(&self, cols: &[f64], big: &mut [f64]) {
        let (h, w) = self.big;
        let (_, ow) = self.small;
        let p = self.small_len();
        let kk = self.k * self.k;
        for b in 0..self.cin {
            for t in 0..kk {
                let ((y0, y1), (x0, x1), ky, kx) = self.spans(t);
                if x1 <= x0 {
                    continue;
                }
                let row = &cols[(b * kk + t) * p..(b * kk + t + 1) * p];
                for oy in y0..y1 {
                    let iy = oy * self.stride + ky - self.pad.0;
                    let dst = big[(b * h + iy) * w + x0 * self.stride + kx - self.pad.1..]
                        .iter_mut()
                        .step_by(self.stride);
                    for (d, &v) in dst.zip(&row[oy * ow + x0..oy * ow + x1]) {
                        *d += v;
                    }
                }
            }
        }
    }

    /// `small[s] += Σ w · big[b]` (convolution forward). Taps are laid out
    /// `[small channel, big channel, k, k]`.
    pub fn gather(&self, big: &[f64], taps: &[f64], small: &mut [f64]) {
        let cols = self.im2col(big);
        let (p, r) = (self.small_len(), self.patch_len());
        for s in 0..self.cout {
            let out = &mut small[s * p..(s + 1) * p];
            for (j, &wv) in taps[s * r..(s + 1) * r].iter().enumerate() {
                for (o, &c) in out.iter_mut().zip(&cols[j * p..(j + 1) * p]) {
                    *o += wv * c;
                }
            }
        }
    }

    /// `big[b] += Σ w · small[s]` (adjoint of [`Geometry::gather`]).
    pub fn scatter(&self, small: &[f64], taps: &[f64], big: &mut [f64]) {
        let (p, r) = (self.small_len(), self.patch_len());
        let mut cols = vec![0.0; r * p];
        for s in 0..self.cout {
            let src = &small[s * p..(s + 1) * p];
            for (j, &wv) in taps[s * r..(s + 1) * r].iter().enumerate() {
                for (c, &v) in cols[j * p..(j + 1) * p].iter_mut().zip(src) {
                    *c += wv * v;
                }
            }
        }
        self.col2im(&cols, big);
    }

    /// `dw[s, b, t] += Σ small[s] · big[b]` shifted by tap `t`: the weight
    /// gradient, shared by both directions since the tap layout is.
    pub fn correlate(&self, small: &[f64], big: &[f64], dw: &mut [f64]) {
        let cols = self.im2col(big);
        let (p, r) = (self.small_len(), self.patch_len());
        for s in 0..self.cout {
            let g = &small[s * p..(s + 1) * p];
            for (j, d) in dw[s * r..(s + 1) * r].iter_mut().enumerate() {
                *d += g
                    .iter()
                    .zip(&cols[j * p..(j + 1) * p])
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
            }
        }
    }
}

/// Adds `bias[c]` to every sample of channel `c`.
pub(crate) fn add_bias(data: &mut [f64], bias: &[f64]) {
    let n = data.len() / bias.len();
    for (c, &b) in bias.iter().enumerate() {
        for v in &mut data[c * n..(c + 1) * n] {
            *v += b;
        }
    }
}

/// `db[c] += Σ grad[c]`.
pub(crate) fn bias_grad(grad: &[f64], db: &mut [f64]) {
    let n = grad.len() / db.len();
    for (c, d) in db.iter_mut().enumerate() {
        *d += grad[c * n..(c + 1) * n].iter().sum::<f64>();
    }
}

pub(crate) fn conv_raw(
    x: &Tensor,
    taps: &[f64],
    bias: &[f64],
    cout: usize,
    k: usize,
    stride: usize,
) -> Tensor {
    let (cin, h, w) = x.dims3().expect("rank checked by caller");
    let g = Geometry::conv(cin, cout, k, stride, h, w);
    let mut out = vec![0.0; cout * g.small.0 * g.small.1];
    add_bias(&mut out, bias);
    g.gather(x.data(), taps, &mut out);
    Tensor::from_parts([cout, g.small.0, g.small.1], out)
}

pub(crate) fn conv_transpose_raw(
    x: &Tensor,
    taps: &[f64],
    bias: &[f64],
    cout: usize,
    k: usize,
    stride: usize,
) -> Tensor {
    let (cin, h, w) = x.dims3().expect("rank checked by caller");
    let g = Geometry::transposed(cin, cout, k, stride, h, w);
    let mut out = vec![0.0; cout * g.big.0 * g.big.1];
    add_bias(&mut out, bias);
    g.scatter(x.data(), taps, &mut out);
    Tensor::from_parts([cout, g.big.0, g.big.1], out)
}

fn check_input(x: &Tensor, channels: usize) -> Result<()> {
    let (c, _, _) = x.dims3()?;
    if c != channels {
        return Err(Error::ShapeMismatch(
            "input channels do not match the weights",
        ));
    }
    Ok(())
}

/// Strided "same" cross-correlation; stride 2 halves each side (rounding up).
pub fn conv_forward(x: &Tensor, weights: &ConvWeights, stride: usize) -> Result<Tensor> {
    check_stride(stride)?;
    check_input(x, weights.in_channels)?;
    Ok(conv_raw(
        x,
        &weights.taps,
        &weights.bias,
        weights.out_channels,
        weights.kernel,
        stride,
    ))
}

/// Adjoint of [`conv_forward`] plus bias; stride 2 doubles each side.
pub fn conv_transpose_forward(x: &Tensor, weights: &ConvWeights, stride: usize) -> Result<Tensor> {
    check_stride(stride)?;
    check_input(x, weights.in_channels)?;
    Ok(conv_transpose_raw(
        x,
        &weights.taps,
        &weights.bias,
        weights.out_channels,
        weights.kernel,
        stride,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn padding_convention() {
        assert_eq!(same_padding(8, 4, 2), (4, 1));
        assert_eq!(same_padding(8, 4, 1), (8, 1));
        assert_eq!(same_padding(8, 1, 2), (4, 0));
        assert_eq!(same_padding(7, 4, 2), (4, 1));
    }

    #[test]
    fn single_tap_kernel_shifts() {
        // one tap at (ky, kx) = (2, 2) with one leading zero of padding reads
        // x[y + 1][x + 1]
        let x = Tensor::new(&[1, 4, 4], (0..16).map(|v| v as f64).collect()).unwrap();
        let mut taps = vec![0.0; 16];
        taps[2 * 4 + 2] = 1.0;
        let wts = ConvWeights::new(1, 1, 4, taps, vec![0.0]).unwrap();
        let y = conv_forward(&x, &wts, 1).unwrap();
        assert_eq!(y.shape(), &[1, 4, 4]);
        for r in 0..4 {
            for c in 0..4 {
                let want = if r < 3 && c < 3 {
                    ((r + 1) * 4 + c + 1) as f64
                } else {
                    0.0
                };
                assert_eq!(y.data()[r * 4 + c], want);
            }
        }
    }

    #[test]
    fn stride_two_shapes() {
        let x = Tensor::zeros(&[2, 8, 8]);
        let down = conv_forward(&x, &ConvWeights::zeros(2, 3, 4), 2).unwrap();
        assert_eq!(down.shape(), &[3, 4, 4]);
        let up = conv_transpose_forward(&down, &ConvWeights::zeros(3, 2, 4), 2).unwrap();
        assert_eq!(up.shape(), &[2, 8, 8]);
        assert!(conv_forward(&x, &ConvWeights::zeros(3, 3, 4), 2).is_err());
        assert!(conv_forward(&x, &ConvWeights::zeros(2, 3, 4), 3).is_err());
    }

    #[test]
    fn bias_fills_output() {
        let x = Tensor::zeros(&[1, 2, 2]);
        let w = ConvWeights::new(1, 2, 1, vec![0.0, 0.0], vec![0.5, -1.0]).unwrap();
        assert_eq!(
            conv_forward(&x, &w, 1).unwrap().data(),
            &[0.5, 0.5, 0.5, 0.5, -1.0, -1.0, -1.0, -1.0]
        );
    }
}
