//! Forward pass and backpropagation through time for the stacked Bi-LSTM.
//!
//! Input projections `X·W_x` for a whole sequence are one matrix product; only
//! the recurrent `h·W_h` term is evaluated step by step. The backward
//! direction runs the same recurrence over a time-reversed view of its input.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::params::{BilstmParams, DirectionParams, NUM_CLASSES};
use crate::error::{Error, Result};

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `z += h_prev · w_h`, with `w_h` row-major `hidden × 4·hidden`.
#[inline]
fn add_recurrent(z: &mut [f64], h_prev: &[f64], w_h: &[f64]) {
    let width = z.len();
    for (k, &h) in h_prev.iter().enumerate() {
        if h == 0.0 {
            continue;
        }
        let row = &w_h[k * width..(k + 1) * width];
        for (zj, wj) in z.iter_mut().zip(row) {
            *zj += h * wj;
        }
    }
}

/// Turns pre-activations `z = [z_i, z_f, z_c, z_o]` into `[i, f, g, o]` in
/// place and writes the new cell and hidden state.
#[inline]
fn cell_update(z: &mut [f64], c_prev: Option<&[f64]>, c: &mut [f64], h: &mut [f64]) {
    let hidden = c.len();
    let (zi, rest) = z.split_at_mut(hidden);
    let (zf, rest) = rest.split_at_mut(hidden);
    let (zc, zo) = rest.split_at_mut(hidden);
    for j in 0..hidden {
        let i = sigmoid(zi[j]);
        let f = sigmoid(zf[j]);
        let g = zc[j].tanh();
        let o = sigmoid(zo[j]);
        let cp = c_prev.map_or(0.0, |cp| cp[j]);
        let ct = f * cp + i * g;
        zi[j] = i;
        zf[j] = f;
        zc[j] = g;
        zo[j] = o;
        c[j] = ct;
        h[j] = o * ct.tanh();
    }
}

/// One LSTM step: returns `(h_t, c_t)`.
pub fn lstm_cell_forward(
    x: ArrayView1<'_, f64>,
    h_prev: ArrayView1<'_, f64>,
    c_prev: ArrayView1<'_, f64>,
    params: &DirectionParams,
) -> Result<(Array1<f64>, Array1<f64>)> {
    params.check("lstm cell")?;
    let hidden = params.hidden_size();
    for (what, expected, actual) in [
        ("cell input", params.input_size(), x.len()),
        ("previous hidden state", hidden, h_prev.len()),
        ("previous cell state", hidden, c_prev.len()),
    ] {
        if expected != actual {
            return Err(Error::Dimension {
                what,
                expected,
                actual,
            });
        }
    }
    let mut z = x.dot(&params.w_x) + &params.b;
    let z = z.as_slice_mut().expect("fresh array");
    add_recurrent(z, &h_prev.to_vec(), params.w_h.as_slice().expect("standard layout"));
    let mut c = Array1::zeros(hidden);
    let mut h = Array1::zeros(hidden);
    cell_update(
        z,
        Some(&c_prev.to_vec()),
        c.as_slice_mut().expect("fresh array"),
        h.as_slice_mut().expect("fresh array"),
    );
    Ok((h, c))
}

/// Everything one direction of one layer needs for its backward pass, in the
/// direction's own time order.
#[derive(Debug, Clone)]
struct DirectionTrace {
    input: Array2<f64>,
    /// Gate activations `[i, f, g, o]` per step.
    gates: Array2<f64>,
    cell: Array2<f64>,
    hidden: Array2<f64>,
}

fn run_direction(params: &DirectionParams, input: ArrayView2<'_, f64>) -> DirectionTrace {
    let steps = input.nrows();
    let hidden = params.hidden_size();
    let width = 4 * hidden;
    let input = input.to_owned();
    let mut gates = input.dot(&params.w_x);
    gates += &params.b;
    let mut cell = Array2::zeros((steps, hidden));
    let mut hid = Array2::zeros((steps, hidden));
    {
        let w_h = params.w_h.as_slice().expect("standard layout");
        let zs = gates.as_slice_mut().expect("standard layout");
        let cs = cell.as_slice_mut().expect("standard layout");
        let hs = hid.as_slice_mut().expect("standard layout");
        for t in 0..steps {
            let z = &mut zs[t * width..(t + 1) * width];
            let (c_before, c_rest) = cs.split_at_mut(t * hidden);
            let (h_before, h_rest) = hs.split_at_mut(t * hidden);
            let c_prev = (t > 0).then(|| &c_before[(t - 1) * hidden..]);
            if t > 0 {
                add_recurrent(z, &h_before[(t - 1) * hidden..], w_h);
            }
            cell_update(z, c_prev, &mut c_rest[..hidden], &mut h_rest[..hidden]);
        }
    }
    DirectionTrace {
        input,
        gates,
        cell,
        hidden: hid,
    }
}

/// Backpropagates `d_hidden` (gradient w.r.t. each step's `h`, own time
/// order) through one direction, accumulating into `grads`. Returns the
/// gradient w.r.t. the direction's input when asked for.
fn backprop_direction(
    params: &DirectionParams,
    trace: &DirectionTrace,
    d_hidden: ArrayView2<'_, f64>,
    grads: &mut DirectionParams,
    want_input_grad: bool,
) -> Option<Array2<f64>> {
    let steps = trace.gates.nrows();
    let hidden = params.hidden_size();
    let width = 4 * hidden;
    let mut dz = Array2::<f64>::zeros((steps, width));
    {
        let w_h = params.w_h.as_slice().expect("standard layout");
        let gates = trace.gates.as_slice().expect("standard layout");
        let cell = trace.cell.as_slice().expect("standard layout");
        let dzs = dz.as_slice_mut().expect("standard layout");
        let mut dh_next = vec![0.0; hidden];
        let mut dc_next = vec![0.0; hidden];
        for t in (0..steps).rev() {
            let a = &gates[t * width..(t + 1) * width];
            let c = &cell[t * hidden..(t + 1) * hidden];
            let dzt = &mut dzs[t * width..(t + 1) * width];
            for j in 0..hidden {
                let (i, f, g, o) = (a[j], a[hidden + j], a[2 * hidden + j], a[3 * hidden + j]);
                let tc = c[j].tanh();
                let cp = if t > 0 { cell[(t - 1) * hidden + j] } else { 0.0 };
                let dh = d_hidden[[t, j]] + dh_next[j];
                let dc = dc_next[j] + dh * o * (1.0 - tc * tc);
                dzt[j] = dc * g * i * (1.0 - i);
                dzt[hidden + j] = dc * cp * f * (1.0 - f);
                dzt[2 * hidden + j] = dc * i * (1.0 - g * g);
                dzt[3 * hidden + j] = dh * tc * o * (1.0 - o);
                dc_next[j] = dc * f;
            }
            for (k, dh) in dh_next.iter_mut().enumerate() {
                let row = &w_h[k * width..(k + 1) * width];
                *dh = row.iter().zip(dzt.iter()).map(|(w, d)| w * d).sum();
            }
        }
    }
    general_mat_mul(1.0, &trace.input.t(), &dz, 1.0, &mut grads.w_x);
    if steps > 1 {
        general_mat_mul(
            1.0,
            &trace.hidden.slice(s![..steps - 1, ..]).t(),
            &dz.slice(s![1.., ..]),
            1.0,
            &mut grads.w_h,
        );
    }
    grads.b += &dz.sum_axis(Axis(0));
    want_input_grad.then(|| dz.dot(&params.w_x.t()))
}

/// Activations kept from a forward pass for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    layers: Vec<(DirectionTrace, DirectionTrace)>,
}

fn check_input(params: &BilstmParams, seq: ArrayView2<'_, f64>) -> Result<()> {
    if seq.nrows() == 0 {
        return Err(Error::Empty("sequence has no frames"));
    }
    let expected = params.layers[0].forward.input_size();
    if seq.ncols() != expected {
        return Err(Error::Dimension {
            what: "frame feature width",
            expected,
            actual: seq.ncols(),
        });
    }
    Ok(())
}

/// Runs the network and keeps the activations for backpropagation.
/// Returns per-frame logits (`T × 2`).
pub fn forward_traced(
    params: &BilstmParams,
    seq: ArrayView2<'_, f64>,
) -> Result<(Array2<f64>, ForwardTrace)> {
    params.validate()?;
    check_input(params, seq)?;
    let steps = seq.nrows();
    let hidden = params.shape().hidden_size;
    let mut traces = Vec::with_capacity(params.layers.len());
    let mut input = seq.to_owned();
    for layer in &params.layers {
        let fwd = run_direction(&layer.forward, input.view());
        let bwd = run_direction(&layer.backward, input.slice(s![..;-1, ..]));
        let mut out = Array2::zeros((steps, 2 * hidden));
        out.slice_mut(s![.., ..hidden]).assign(&fwd.hidden);
        out.slice_mut(s![.., hidden..])
            .assign(&bwd.hidden.slice(s![..;-1, ..]));
        traces.push((fwd, bwd));
        input = out;
    }
    let (top_f, top_b) = traces.last().expect("at least one layer");
    let mut logits = top_f.hidden.dot(&params.w_fwd_y);
    general_mat_mul(
        1.0,
        &top_b.hidden.slice(s![..;-1, ..]),
        &params.w_bwd_y,
        1.0,
        &mut logits,
    );
    logits += &params.b_y;
    Ok((logits, ForwardTrace { layers: traces }))
}

/// Per-frame logits `y_t` (`T × 2`).
pub fn bilstm_forward(params: &BilstmParams, seq: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    forward_traced(params, seq).map(|(logits, _)| logits)
}

/// Accumulates into `grads` the gradient of a loss whose derivative with
/// respect to the logits is `d_logits`.
pub fn backward(
    params: &BilstmParams,
    trace: &ForwardTrace,
    d_logits: ArrayView2<'_, f64>,
    grads: &mut BilstmParams,
) -> Result<()> {
    let steps = trace.layers[0].0.gates.nrows();
    if d_logits.dim() != (steps, NUM_CLASSES) {
        return Err(Error::Dimension {
            what: "logit gradient rows",
            expected: steps,
            actual: d_logits.nrows(),
        });
    }
    let hidden = params.shape().hidden_size;
    let (top_f, top_b) = trace.layers.last().expect("at least one layer");
    let top_b_natural = top_b.hidden.slice(s![..;-1, ..]);
    general_mat_mul(1.0, &top_f.hidden.t(), &d_logits, 1.0, &mut grads.w_fwd_y);
    general_mat_mul(1.0, &top_b_natural.t(), &d_logits, 1.0, &mut grads.w_bwd_y);
    grads.b_y += &d_logits.sum_axis(Axis(0));

    let mut d_fwd = d_logits.dot(&params.w_fwd_y.t());
    let mut d_bwd = d_logits.dot(&params.w_bwd_y.t());
    for l in (0..params.layers.len()).rev() {
        let layer = &params.layers[l];
        let (tf, tb) = &trace.layers[l];
        let want = l > 0;
        let gl = &mut grads.layers[l];
        let dx_f = backprop_direction(&layer.forward, tf, d_fwd.view(), &mut gl.forward, want);
        let dx_b = backprop_direction(
            &layer.backward,
            tb,
            d_bwd.slice(s![..;-1, ..]),
            &mut gl.backward,
            want,
        );
        if let (Some(mut dx), Some(dx_b)) = (dx_f, dx_b) {
            dx += &dx_b.slice(s![..;-1, ..]);
            d_fwd = dx.slice(s![.., ..hidden]).to_owned();
            d_bwd = dx.slice(s![.., hidden..]).to_owned();
        }
    }
    Ok(())
}
