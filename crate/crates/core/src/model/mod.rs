//! The factorization network.
//!
//! A pair `(i, j)` is scored as
//!
//! ```text
//! h        = E[i] ⊙ E[j]
//! logit[k] = W[k]·h + c[k] + u[k]·(b[i] + b[j])
//! ```
//!
//! `E` (embeddings) and `b` (per-drug bias) are shared by both input slots,
//! so with dropout off `logits(i, j) == logits(j, i)` bit for bit. During
//! training each slot gets its own inverted-dropout mask.

mod adam;
mod grad;

pub use adam::{adam_step, adam_update, OptimizerState, ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON};
pub(crate) use grad::batch_loss;
pub use grad::{backward, gradient_check, loss, GradientSet, LOG_CLAMP};

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{DrugIdx, Roster};
use crate::rng::{rng_for, Rng, Stream};

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Hyperparameters {
    pub embedding_dim: usize,
    pub dropout: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Propagation factor.
    pub alpha: f64,
    pub seed: u64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self::holdout_preset()
    }
}

impl Hyperparameters {
    /// Tuned values for the single-snapshot k-fold setting.
    pub fn holdout_preset() -> Self {
        Self {
            embedding_dim: 512,
            dropout: 0.3,
            epochs: 15,
            batch_size: 256,
            learning_rate: 0.01,
            alpha: 0.8,
            seed: 0,
        }
    }

    /// Tuned values for the two-snapshot setting.
    pub fn retrospective_preset() -> Self {
        Self {
            embedding_dim: 512,
            dropout: 0.3,
            epochs: 5,
            batch_size: 1024,
            learning_rate: 0.01,
            alpha: 0.8,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidConfig(what));
        if self.embedding_dim == 0 {
            return bad(String::from("embedding_dim must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} not in [0, 1)", self.dropout));
        }
        if self.batch_size == 0 {
            return bad(String::from("batch_size must be >= 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning_rate {} must be positive",
                self.learning_rate
            ));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha {} not in [0, 1]", self.alpha));
        }
        Ok(())
    }
}

/// All trainable tensors, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    n: usize,
    k: usize,
    d: usize,
    /// n × d shared embedding table.
    pub e: Vec<f64>,
    /// Shared per-drug bias, length n.
    pub b: Vec<f64>,
    /// K × d class projection.
    pub w: Vec<f64>,
    /// Class bias, length K.
    pub c: Vec<f64>,
    /// Bias-coupling weights, length K.
    pub u: Vec<f64>,
}

/// Inverted-dropout settings for a training-mode forward pass.
pub struct Dropout<'a> {
    pub rate: f64,
    pub rng: &'a mut Rng,
}

impl ModelParameters {
    /// All-zero parameters (with `u = 1`).
    pub fn zeros(n: usize, k: usize, d: usize) -> Self {
        Self {
            n,
            k,
            d,
            e: vec![0.0; n * d],
            b: vec![0.0; n],
            w: vec![0.0; k * d],
            c: vec![0.0; k],
            u: vec![1.0; k],
        }
    }

    /// Assembles parameters from raw tensors, checking every length.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        n: usize,
        k: usize,
        d: usize,
        e: Vec<f64>,
        b: Vec<f64>,
        w: Vec<f64>,
        c: Vec<f64>,
        u: Vec<f64>,
    ) -> Result<Self> {
        let expect = [
            ("E", e.len(), n * d),
            ("b", b.len(), n),
            ("W", w.len(), k * d),
            ("c", c.len(), k),
            ("u", u.len(), k),
        ];
        for (name, got, want) in expect {
            if got != want {
                return Err(Error::ShapeMismatch(format!(
                    "{name}: {got} values, expected {want}"
                )));
            }
        }
        Ok(Self {
            n,
            k,
            d,
            e,
            b,
            w,
            c,
            u,
        })
    }

    pub fn n_drugs(&self) -> usize {
        self.n
    }

    pub fn n_classes(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn embedding(&self, i: DrugIdx) -> &[f64] {
        &self.e[i.0 * self.d..(i.0 + 1) * self.d]
    }

    pub fn class_row(&self, k: usize) -> &[f64] {
        &self.w[k * self.d..(k + 1) * self.d]
    }

    pub(crate) fn tensors(&self) -> [&[f64]; 5] {
        [&self.e, &self.b, &self.w, &self.c, &self.u]
    }

    pub(crate) fn tensors_mut(&mut self) -> [&mut Vec<f64>; 5] {
        [
            &mut self.e,
            &mut self.b,
            &mut self.w,
            &mut self.c,
            &mut self.u,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.iter().all(|x| x.is_finite()))
    }

    fn check_pair(&self, i: DrugIdx, j: DrugIdx) -> Result<()> {
        if i == j {
            return Err(Error::SelfLoop(i.0));
        }
        for x in [i, j] {
            if x.0 >= self.n {
                return Err(Error::UnknownDrug(format!("#{}", x.0)));
            }
        }
        Ok(())
    }

    /// Pair representation and logits. `masks`, when given, are the two
    /// slots' inverted-dropout multipliers.
    pub(crate) fn forward_parts(
        &self,
        i: DrugIdx,
        j: DrugIdx,
        masks: Option<(&[f64], &[f64])>,
    ) -> (Vec<f64>, Vec<f64>) {
        let (ei, ej) = (self.embedding(i), self.embedding(j));
        let h: Vec<f64> = match masks {
            None => ei.iter().zip(ej).map(|(a, b)| a * b).collect(),
            Some((mi, mj)) => (0..self.d)
                .map(|t| (mi[t] * ei[t]) * (mj[t] * ej[t]))
                .collect(),
        };
        let bias = self.b[i.0] + self.b[j.0];
        let logits = (0..self.k)
            .map(|k| dot(self.class_row(k), &h) + self.c[k] + self.u[k] * bias)
            .collect();
        (h, logits)
    }

    pub(crate) fn draw_masks(&self, dropout: &mut Dropout<'_>) -> (Vec<f64>, Vec<f64>) {
        let keep = 1.0 - dropout.rate;
        let scale = 1.0 / keep;
        let mut draw = || -> Vec<f64> {
            (0..self.d)
                .map(|_| {
                    if dropout.rng.random::<f64>() < keep {
                        scale
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        let mi = draw();
        let mj = draw();
        (mi, mj)
    }

    /// Raw class scores. Dropout is applied only when `dropout` is given
    /// and its rate is positive.
    pub fn forward(
        &self,
        i: DrugIdx,
        j: DrugIdx,
        dropout: Option<&mut Dropout<'_>>,
    ) -> Result<Vec<f64>> {
        self.check_pair(i, j)?;
        let masks = match dropout {
            Some(dp) if dp.rate > 0.0 => Some(self.draw_masks(dp)),
            _ => None,
        };
        let (_, logits) = self.forward_parts(
            i,
            j,
            masks.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice())),
        );
        Ok(logits)
    }

    /// Class distribution for a pair, dropout off. Symmetric in `(i, j)`.
    pub fn predict(&self, i: DrugIdx, j: DrugIdx) -> Result<Vec<f64>> {
        Ok(softmax(&self.forward(i, j, None)?))
    }

    /// Embedding rows paired with the roster's external ids, in roster order.
    pub fn export_embeddings(&self, roster: &Roster) -> Result<Vec<(String, Vec<f64>)>> {
        if roster.len() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "roster has {} drugs, model has {}",
                roster.len(),
                self.n
            )));
        }
        Ok(roster
            .iter()
            .map(|(idx, drug)| (drug.external_id.clone(), self.embedding(idx).to_vec()))
            .collect())
    }

    /// Overwrites the embedding table from exported rows.
    pub fn import_embeddings(&mut self, rows: &[(String, Vec<f64>)]) -> Result<()> {
        if rows.len() != self.n || rows.iter().any(|(_, r)| r.len() != self.d) {
            return Err(Error::ShapeMismatch(format!(
                "expected {} rows of width {}",
                self.n, self.d
            )));
        }
        for (i, (_, row)) in rows.iter().enumerate() {
            self.e[i * self.d..(i + 1) * self.d].copy_from_slice(row);
        }
        Ok(())
    }
}

/// Seeded initialization: `E` and `W` uniform on `±1/√d`, `b` and `c` zero,
/// `u` one.
pub fn init_model(n: usize, k: usize, hp: &Hyperparameters) -> Result<ModelParameters> {
    if n < 2 || k < 2 || hp.embedding_dim == 0 {
        return Err(Error::InvalidDimensions(format!(
            "need n >= 2, K >= 2, d >= 1 (got n={n}, K={k}, d={})",
            hp.embedding_dim
        )));
    }
    let d = hp.embedding_dim;
    let scale = 1.0 / libm::sqrt(d as f64);
    let mut rng = rng_for(hp.seed, Stream::Init, 0);
    let mut params = ModelParameters::zeros(n, k, d);
    for x in params.e.iter_mut().chain(params.w.iter_mut()) {
        *x = rng.random_range(-scale..=scale);
    }
    Ok(params)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| libm::exp(z - max)).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}
