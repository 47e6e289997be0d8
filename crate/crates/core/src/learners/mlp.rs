use rand::seq::SliceRandom;
use rand::Rng;

use super::FitInfo;
use crate::cohort::EncodedMatrix;
use crate::error::{Error, Result};
use crate::{rng, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// L2 penalty on weights (not biases).
    pub alpha: f64,
    /// Clamped to the number of rows.
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Minimum improvement over the best epoch loss.
    pub tol: f64,
    /// Consecutive epochs without `tol` improvement before stopping.
    pub patience: usize,
    pub shuffle: bool,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 100,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            alpha: 1e-4,
            batch_size: 32,
            max_epochs: 200,
            tol: 1e-4,
            patience: 10,
            shuffle: true,
        }
    }
}

impl MlpParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.hidden >= 1
            && self.learning_rate > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0
            && self.alpha >= 0.0
            && self.batch_size >= 1
            && self.max_epochs >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid mlp settings {self:?}")))
        }
    }
}

/// Parameters laid out as one flat vector: W1 (hidden x p), b1 (hidden),
/// W2 (2 x hidden), b2 (2).
#[derive(Debug, Clone, PartialEq)]
struct Layout {
    p: usize,
    h: usize,
}

impl Layout {
    fn w1(&self) -> std::ops::Range<usize> {
        0..self.h * self.p
    }
    fn b1(&self) -> std::ops::Range<usize> {
        let s = self.h * self.p;
        s..s + self.h
    }
    fn w2(&self) -> std::ops::Range<usize> {
        let s = self.h * self.p + self.h;
        s..s + 2 * self.h
    }
    fn b2(&self) -> std::ops::Range<usize> {
        let s = self.h * self.p + 3 * self.h;
        s..s + 2
    }
    fn len(&self) -> usize {
        self.h * self.p + 3 * self.h + 2
    }
}

/// One-hidden-layer ReLU network with a two-way softmax output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    layout: Layout,
    params: Vec<T>,
    loss_curve: Vec<f64>,
}

impl<T: Scalar> Mlp<T> {
    pub fn fit(cfg: &MlpParams, x: &EncodedMatrix<T>, seed: u64) -> Result<(Self, FitInfo)> {
        cfg.validate()?;
        let [zeros, ones] = x.class_counts();
        if zeros == 0 || ones == 0 {
            return Err(Error::Imbalance("mlp needs both classes".into()));
        }
        let n = x.n_rows();
        let layout = Layout {
            p: x.n_cols(),
            h: cfg.hidden,
        };
        let mut rng = rng::stream(seed, &[]);
        let mut theta = vec![T::zero(); layout.len()];
        // Glorot-uniform initialisation from fan-in and fan-out.
        let bound1 = (6.0 / (layout.p + layout.h) as f64).sqrt();
        let bound2 = (6.0 / (layout.h + 2) as f64).sqrt();
        for i in layout.w1().chain(layout.b1()) {
            theta[i] = T::of(rng.random_range(-bound1..bound1));
        }
        for i in layout.w2().chain(layout.b2()) {
            theta[i] = T::of(rng.random_range(-bound2..bound2));
        }

        let mut m = vec![T::zero(); theta.len()];
        let mut v = vec![T::zero(); theta.len()];
        let (b1, b2) = (T::of(cfg.beta1), T::of(cfg.beta2));
        let (lr, eps) = (T::of(cfg.learning_rate), T::of(cfg.epsilon));
        let batch = cfg.batch_size.min(n);
        let mut order: Vec<usize> = (0..n).collect();
        let mut grad = vec![T::zero(); theta.len()];
        let mut scratch = Scratch::new(&layout);
        let mut step = 0i32;
        let mut best = f64::INFINITY;
        let mut stale = 0;
        let mut converged = false;
        let mut loss_curve = Vec::new();

        for _epoch in 0..cfg.max_epochs {
            if cfg.shuffle {
                order.shuffle(&mut rng);
            }
            let mut epoch_loss = 0.0;
            for chunk in order.chunks(batch) {
                let batch_loss = batch_gradient(&layout, &theta, x, chunk, cfg.alpha, &mut grad, &mut scratch);
                epoch_loss += batch_loss * chunk.len() as f64;
                step += 1;
                let c1 = T::one() - b1.powi(step);
                let c2 = T::one() - b2.powi(step);
                let lr_t = lr * c2.sqrt() / c1;
                for k in 0..theta.len() {
                    m[k] = b1 * m[k] + (T::one() - b1) * grad[k];
                    v[k] = b2 * v[k] + (T::one() - b2) * grad[k] * grad[k];
                    theta[k] = theta[k] - lr_t * m[k] / (v[k].sqrt() + eps);
                }
            }
            let loss = epoch_loss / n as f64;
            loss_curve.push(loss);
            if loss > best - cfg.tol {
                stale += 1;
            } else {
                stale = 0;
            }
            if loss < best {
                best = loss;
            }
            if stale > cfg.patience {
                converged = true;
                break;
            }
        }
        let info = FitInfo {
            iterations: loss_curve.len(),
            converged,
            objective: *loss_curve.last().expect("at least one epoch"),
        };
        Ok((
            Mlp {
                layout,
                params: theta,
                loss_curve,
            },
            info,
        ))
    }

    /// Mean training loss of each epoch, accumulated over its mini-batches.
    pub fn loss_curve(&self) -> &[f64] {
        &self.loss_curve
    }

    /// Class-1 probability.
    pub fn predict_proba(&self, x: &[T]) -> T {
        let mut s = Scratch::new(&self.layout);
        let [z0, z1] = forward(&self.layout, &self.params, x, &mut s.hidden);
        T::one() / (T::one() + (z0 - z1).exp())
    }

    pub fn predict_row(&self, x: &[T]) -> u8 {
        let mut hidden = vec![T::zero(); self.layout.h];
        let [z0, z1] = forward(&self.layout, &self.params, x, &mut hidden);
        u8::from(z1 > z0)
    }
}

struct Scratch<T> {
    hidden: Vec<T>,
    delta_h: Vec<T>,
}

impl<T: Scalar> Scratch<T> {
    fn new(layout: &Layout) -> Self {
        Scratch {
            hidden: vec![T::zero(); layout.h],
            delta_h: vec![T::zero(); layout.h],
        }
    }
}

/// Output logits; leaves ReLU activations in `hidden`.
fn forward<T: Scalar>(layout: &Layout, theta: &[T], x: &[T], hidden: &mut [T]) -> [T; 2] {
    let (p, h) = (layout.p, layout.h);
    let w1 = &theta[layout.w1()];
    let b1 = &theta[layout.b1()];
    for u in 0..h {
        let row = &w1[u * p..(u + 1) * p];
        let a = row.iter().zip(x).fold(b1[u], |acc, (&w, &xi)| acc + w * xi);
        hidden[u] = a.max(T::zero());
    }
    let w2 = &theta[layout.w2()];
    let b2 = &theta[layout.b2()];
    let mut out = [b2[0], b2[1]];
    for (c, o) in out.iter_mut().enumerate() {
        *o = w2[c * h..(c + 1) * h]
            .iter()
            .zip(hidden.iter())
            .fold(*o, |acc, (&w, &a)| acc + w * a);
    }
    out
}

/// Mean cross-entropy plus `alpha / (2 m) |W|^2` over the batch; writes its
/// gradient into `grad`.
fn batch_gradient<T: Scalar>(
    layout: &Layout,
    theta: &[T],
    x: &EncodedMatrix<T>,
    batch: &[usize],
    alpha: f64,
    grad: &mut [T],
    s: &mut Scratch<T>,
) -> f64 {
    let (p, h) = (layout.p, layout.h);
    grad.iter_mut().for_each(|g| *g = T::zero());
    let m = T::of_usize(batch.len());
    let mut loss = 0.0;
    for &i in batch {
        let row = x.row(i);
        let [z0, z1] = forward(layout, theta, row, &mut s.hidden);
        let zmax = z0.max(z1);
        let (e0, e1) = ((z0 - zmax).exp(), (z1 - zmax).exp());
        let total = e0 + e1;
        let probs = [e0 / total, e1 / total];
        let y = usize::from(x.labels()[i]);
        loss -= probs[y].as_f64().max(1e-300).ln();
        let delta_out = [
            (probs[0] - if y == 0 { T::one() } else { T::zero() }) / m,
            (probs[1] - if y == 1 { T::one() } else { T::zero() }) / m,
        ];
        let w2_start = layout.w2().start;
        let b2_start = layout.b2().start;
        for c in 0..2 {
            grad[b2_start + c] = grad[b2_start + c] + delta_out[c];
            for u in 0..h {
                grad[w2_start + c * h + u] = grad[w2_start + c * h + u] + delta_out[c] * s.hidden[u];
            }
        }
        for u in 0..h {
            s.delta_h[u] = if s.hidden[u] > T::zero() {
                delta_out[0] * theta[w2_start + u] + delta_out[1] * theta[w2_start + h + u]
            } else {
                T::zero()
            };
        }
        let b1_start = layout.b1().start;
        for u in 0..h {
            let d = s.delta_h[u];
            if d == T::zero() {
                continue;
            }
            grad[b1_start + u] = grad[b1_start + u] + d;
            let g = &mut grad[u * p..(u + 1) * p];
            for (gj, &xj) in g.iter_mut().zip(row) {
                *gj = *gj + d * xj;
            }
        }
    }
    let mut penalty = T::zero();
    let a = T::of(alpha);
    for r in [layout.w1(), layout.w2()] {
        for k in r {
            penalty = penalty + theta[k] * theta[k];
            grad[k] = grad[k] + a * theta[k] / m;
        }
    }
    loss / batch.len() as f64 + (a * penalty / (T::of(2.0) * m)).as_f64()
}
