//! Dense multilayer perceptron with tanh hidden layers and a linear output,
//! stored as one flat parameter vector (`[W1 row-major, b1, W2, b2, ...]`).
//! Provides exact reverse-mode gradients, forward-mode directional
//! derivatives (for Fisher-vector products) and lossless flat-parameter
//! views.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::RlError;

#[derive(Debug, Clone)]
pub struct Mlp {
    widths: Vec<usize>,
    params: Vec<f64>,
    /// (weight_offset, bias_offset) per layer.
    offsets: Vec<(usize, usize)>,
}

/// Stored activations from a cached forward pass: `acts[0]` is the input,
/// `acts[l]` (l >= 1) the tanh output feeding layer l, `output` the linear
/// head.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    acts: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

fn orthogonalize_rows(rows: usize, cols: usize, data: &mut [f64]) {
    // Modified Gram-Schmidt over the rows (callers arrange rows <= cols).
    for i in 0..rows {
        for j in 0..i {
            let dot: f64 =
                (0..cols).map(|k| data[i * cols + k] * data[j * cols + k]).sum();
            for k in 0..cols {
                data[i * cols + k] -= dot * data[j * cols + k];
            }
        }
        let norm: f64 = (0..cols).map(|k| data[i * cols + k] * data[i * cols + k]).sum::<f64>().sqrt();
        if norm > 1e-12 {
            for k in 0..cols {
                data[i * cols + k] /= norm;
            }
        }
    }
}

impl Mlp {
    /// Builds a network with orthogonal-style initial weights, zero biases
    /// and the last layer scaled by `final_scale` (near-zero initial
    /// outputs for policy heads).
    pub fn new<R: Rng + ?Sized>(widths: &[usize], final_scale: f64, rng: &mut R) -> Self {
        assert!(widths.len() >= 2, "need at least input and output widths");
        assert!(widths.iter().all(|&w| w > 0), "zero-width layer");
        let mut offsets = Vec::new();
        let mut total = 0usize;
        for l in 0..widths.len() - 1 {
            let (w_in, w_out) = (widths[l], widths[l + 1]);
            offsets.push((total, total + w_in * w_out));
            total += w_in * w_out + w_out;
        }
        let mut params = vec![0.0; total];
        for l in 0..widths.len() - 1 {
            let (w_in, w_out) = (widths[l], widths[l + 1]);
            let (wo, _) = offsets[l];
            let scale = if l == widths.len() - 2 { final_scale } else { 1.0 };
            // Draw a normal matrix and orthogonalise along the smaller side.
            let mut mat: Vec<f64> =
                (0..w_in * w_out).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            if w_out <= w_in {
                orthogonalize_rows(w_out, w_in, &mut mat);
                for (dst, src) in params[wo..wo + w_in * w_out].iter_mut().zip(mat.iter()) {
                    *dst = src * scale;
                }
            } else {
                // Orthogonalise the transpose's rows, then transpose back.
                orthogonalize_rows(w_in, w_out, &mut mat);
                for r in 0..w_out {
                    for c in 0..w_in {
                        params[wo + r * w_in + c] = mat[c * w_out + r] * scale;
                    }
                }
            }
        }
        Mlp { widths: widths.to_vec(), params, offsets }
    }

    /// Rebuilds a network from stored widths and a flat parameter vector
    /// (checkpoint loading).
    pub fn from_flat(widths: &[usize], params: Vec<f64>) -> Result<Self, RlError> {
        if widths.len() < 2 || widths.iter().any(|&w| w == 0) {
            return Err(RlError::structure("invalid width list"));
        }
        let mut offsets = Vec::new();
        let mut total = 0usize;
        for l in 0..widths.len() - 1 {
            let (w_in, w_out) = (widths[l], widths[l + 1]);
            offsets.push((total, total + w_in * w_out));
            total += w_in * w_out + w_out;
        }
        if params.len() != total {
            return Err(RlError::structure(format!(
                "flat vector has {} entries, widths require {total}",
                params.len()
            )));
        }
        Ok(Mlp { widths: widths.to_vec(), params, offsets })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Flat parameter view (lossless round trip with `set_flat_params`).
    pub fn flat_params(&self) -> Vec<f64> {
        self.params.clone()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<(), RlError> {
        if flat.len() != self.params.len() {
            return Err(RlError::structure(format!(
                "flat parameter vector has {} entries, expected {}",
                flat.len(),
                self.params.len()
            )));
        }
        self.params.copy_from_slice(flat);
        Ok(())
    }

    fn layer(&self, l: usize) -> (&[f64], &[f64], usize, usize) {
        let (w_in, w_out) = (self.widths[l], self.widths[l + 1]);
        let (wo, bo) = self.offsets[l];
        (&self.params[wo..wo + w_in * w_out], &self.params[bo..bo + w_out], w_in, w_out)
    }

    /// Plain forward pass.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, RlError> {
        Ok(self.forward_cached(x)?.output)
    }

    /// Forward pass that keeps the activations needed by `backward`.
    pub fn forward_cached(&self, x: &[f64]) -> Result<ForwardCache, RlError> {
        if x.len() != self.input_dim() {
            return Err(RlError::structure(format!(
                "input has {} entries, network expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        let layers = self.widths.len() - 1;
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(layers);
        acts.push(x.to_vec());
        let mut h = x.to_vec();
        let mut output = Vec::new();
        for l in 0..layers {
            let (w, b, w_in, w_out) = self.layer(l);
            let mut z = vec![0.0; w_out];
            for i in 0..w_out {
                let row = &w[i * w_in..(i + 1) * w_in];
                let mut acc = b[i];
                for (wv, hv) in row.iter().zip(h.iter()) {
                    acc += wv * hv;
                }
                z[i] = acc;
            }
            if l + 1 < layers {
                for v in z.iter_mut() {
                    *v = v.tanh();
                }
                acts.push(z.clone());
                h = z;
            } else {
                output = z;
            }
        }
        Ok(ForwardCache { acts, output })
    }

    /// Exact reverse-mode gradients. Returns the flat parameter gradient
    /// and the gradient with respect to the input.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        upstream: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>), RlError> {
        if upstream.len() != self.output_dim() {
            return Err(RlError::structure(format!(
                "upstream gradient has {} entries, output has {}",
                upstream.len(),
                self.output_dim()
            )));
        }
        let mut grad = vec![0.0; self.params.len()];
        self.backward_accumulate(cache, upstream, &mut grad).map(|dx| (grad, dx))
    }

    /// Like `backward` but adds into an existing gradient accumulator.
    pub fn backward_accumulate(
        &self,
        cache: &ForwardCache,
        upstream: &[f64],
        grad: &mut [f64],
    ) -> Result<Vec<f64>, RlError> {
        if grad.len() != self.params.len() {
            return Err(RlError::structure("gradient accumulator length mismatch"));
        }
        let layers = self.widths.len() - 1;
        let mut delta = upstream.to_vec();
        for l in (0..layers).rev() {
            let (w, _, w_in, w_out) = self.layer(l);
            let (wo, bo) = self.offsets[l];
            let input = &cache.acts[l];
            for i in 0..w_out {
                let di = delta[i];
                let grow = &mut grad[wo + i * w_in..wo + (i + 1) * w_in];
                for (g, inp) in grow.iter_mut().zip(input.iter()) {
                    *g += di * inp;
                }
                grad[bo + i] += di;
            }
            // d(input) = W^T delta, through tanh' for hidden activations.
            let mut dinput = vec![0.0; w_in];
            for i in 0..w_out {
                let di = delta[i];
                let row = &w[i * w_in..(i + 1) * w_in];
                for (dv, wv) in dinput.iter_mut().zip(row.iter()) {
                    *dv += wv * di;
                }
            }
            if l > 0 {
                for (dv, a) in dinput.iter_mut().zip(cache.acts[l].iter()) {
                    *dv *= 1.0 - a * a;
                }
                delta = dinput;
            } else {
                return Ok(dinput);
            }
        }
        unreachable!("loop returns at l == 0");
    }

    /// Forward-mode directional derivative: the change of the output along
    /// a flat parameter tangent `v` at fixed input (exact J v product).
    pub fn jvp(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>, RlError> {
        if v.len() != self.params.len() {
            return Err(RlError::structure("tangent length mismatch"));
        }
        if x.len() != self.input_dim() {
            return Err(RlError::structure("jvp input length mismatch"));
        }
        let layers = self.widths.len() - 1;
        let mut h = x.to_vec();
        let mut dh = vec![0.0; x.len()];
        for l in 0..layers {
            let (w, b, w_in, w_out) = self.layer(l);
            let (wo, bo) = self.offsets[l];
            let mut z = vec![0.0; w_out];
            let mut dz = vec![0.0; w_out];
            for i in 0..w_out {
                let row = &w[i * w_in..(i + 1) * w_in];
                let vrow = &v[wo + i * w_in..wo + (i + 1) * w_in];
                let mut acc = b[i];
                let mut dacc = v[bo + i];
                for k in 0..w_in {
                    acc += row[k] * h[k];
                    dacc += vrow[k] * h[k] + row[k] * dh[k];
                }
                z[i] = acc;
                dz[i] = dacc;
            }
            if l + 1 < layers {
                for i in 0..w_out {
                    let a = z[i].tanh();
                    z[i] = a;
                    dz[i] *= 1.0 - a * a;
                }
            }
            h = z;
            dh = dz;
        }
        Ok(dh)
    }
}

/// `target <- tau * online + (1 - tau) * target`.
pub fn polyak_update(target: &mut [f64], online: &[f64], tau: f64) {
    debug_assert_eq!(target.len(), online.len());
    for (t, o) in target.iter_mut().zip(online.iter()) {
        *t = tau * o + (1.0 - tau) * *t;
    }
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
