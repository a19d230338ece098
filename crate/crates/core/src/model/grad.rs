//! Weighted cross-entropy, its analytic gradient, and a finite-difference
//! check of that gradient.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{softmax, Dropout, ModelParameters};
use crate::error::{Error, Result};
use crate::propagation::{argmax, LabeledPair, SoftTarget};

/// Probabilities below this are clamped inside the log.
pub const LOG_CLAMP: f64 = 1e-12;

/// Gradients with the same layout as [`ModelParameters`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub e: Vec<f64>,
    pub b: Vec<f64>,
    pub w: Vec<f64>,
    pub c: Vec<f64>,
    pub u: Vec<f64>,
}

impl GradientSet {
    pub fn zeros_like(p: &ModelParameters) -> Self {
        Self {
            e: vec![0.0; p.e.len()],
            b: vec![0.0; p.b.len()],
            w: vec![0.0; p.w.len()],
            c: vec![0.0; p.c.len()],
            u: vec![0.0; p.u.len()],
        }
    }

    pub(crate) fn tensors(&self) -> [&[f64]; 5] {
        [&self.e, &self.b, &self.w, &self.c, &self.u]
    }
}

fn sample_loss(probs: &[f64], target: &[f64], weight: f64) -> f64 {
    let ce: f64 = probs
        .iter()
        .zip(target)
        .filter(|(_, &t)| t != 0.0)
        .map(|(&p, &t)| -t * libm::log(p.max(LOG_CLAMP)))
        .sum();
    weight * ce
}

/// Mean over the batch of `w[argmax t] * (-Σ t_k log p_k)`.
pub fn loss(
    probs_batch: &[Vec<f64>],
    targets: &[SoftTarget],
    class_weights: &[f64],
) -> Result<f64> {
    if probs_batch.len() != targets.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions vs {} targets",
            probs_batch.len(),
            targets.len()
        )));
    }
    if probs_batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut total = 0.0;
    for (p, t) in probs_batch.iter().zip(targets) {
        if p.len() != t.len() || t.len() != class_weights.len() {
            return Err(Error::ShapeMismatch(format!(
                "row of {} probabilities, target of {}, {} class weights",
                p.len(),
                t.len(),
                class_weights.len()
            )));
        }
        total += sample_loss(p, t.probs(), class_weights[argmax(t.probs())]);
    }
    Ok(total / probs_batch.len() as f64)
}

fn check_batch(
    params: &ModelParameters,
    batch: &[LabeledPair],
    class_weights: &[f64],
) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let k = params.n_classes();
    if class_weights.len() != k {
        return Err(Error::ShapeMismatch(format!(
            "{} class weights for K = {k}",
            class_weights.len()
        )));
    }
    for ex in batch {
        if ex.target.len() != k {
            return Err(Error::ShapeMismatch(format!(
                "target of length {} for K = {k}",
                ex.target.len()
            )));
        }
        params.check_pair(ex.i, ex.j)?;
    }
    Ok(())
}

/// Batch loss and its exact gradient.
///
/// Rows of `E` and entries of `b` not touched by the batch get exactly zero;
/// a drug appearing in either slot accumulates both contributions.
pub fn backward(
    params: &ModelParameters,
    batch: &[LabeledPair],
    class_weights: &[f64],
    mut dropout: Option<&mut Dropout<'_>>,
) -> Result<(GradientSet, f64)> {
    check_batch(params, batch, class_weights)?;
    let d = params.dim();
    let k = params.n_classes();
    let scale = 1.0 / batch.len() as f64;
    let mut grads = GradientSet::zeros_like(params);
    let mut total = 0.0;
    let mut dlogits = vec![0.0; k];
    let mut dh = vec![0.0; d];

    for ex in batch {
        let masks = match dropout.as_deref_mut() {
            Some(dp) if dp.rate > 0.0 => Some(params.draw_masks(dp)),
            _ => None,
        };
        let mask_refs = masks.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice()));
        let (h, logits) = params.forward_parts(ex.i, ex.j, mask_refs);
        let probs = softmax(&logits);
        let t = ex.target.probs();
        let weight = class_weights[argmax(t)];
        total += sample_loss(&probs, t, weight);

        // d/dz of -Σ_{k unclamped} t_k log p_k  =  p·S - t·[unclamped]
        let live_mass: f64 = probs
            .iter()
            .zip(t)
            .filter(|(&p, _)| p >= LOG_CLAMP)
            .map(|(_, &t)| t)
            .sum();
        for kk in 0..k {
            let live = if probs[kk] >= LOG_CLAMP { t[kk] } else { 0.0 };
            dlogits[kk] = weight * scale * (probs[kk] * live_mass - live);
        }

        let bias = params.b[ex.i.0] + params.b[ex.j.0];
        dh.iter_mut().for_each(|x| *x = 0.0);
        let mut dbias = 0.0;
        for (kk, &g) in dlogits.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grads.c[kk] += g;
            grads.u[kk] += g * bias;
            dbias += g * params.u[kk];
            let row = params.class_row(kk);
            let grow = &mut grads.w[kk * d..(kk + 1) * d];
            for t in 0..d {
                grow[t] += g * h[t];
                dh[t] += g * row[t];
            }
        }
        grads.b[ex.i.0] += dbias;
        grads.b[ex.j.0] += dbias;

        let ei = params.embedding(ex.i);
        let ej = params.embedding(ex.j);
        let (oi, oj) = (ex.i.0 * d, ex.j.0 * d);
        match &masks {
            None => {
                for t in 0..d {
                    grads.e[oi + t] += dh[t] * ej[t];
                    grads.e[oj + t] += dh[t] * ei[t];
                }
            }
            Some((mi, mj)) => {
                for t in 0..d {
                    grads.e[oi + t] += dh[t] * mi[t] * (mj[t] * ej[t]);
                    grads.e[oj + t] += dh[t] * mj[t] * (mi[t] * ei[t]);
                }
            }
        }
    }
    Ok((grads, total * scale))
}

/// Loss of the batch with dropout off.
pub(crate) fn batch_loss(
    params: &ModelParameters,
    batch: &[LabeledPair],
    class_weights: &[f64],
) -> f64 {
    let total: f64 = batch
        .iter()
        .map(|ex| {
            let (_, logits) = params.forward_parts(ex.i, ex.j, None);
            let t = ex.target.probs();
            sample_loss(&softmax(&logits), t, class_weights[argmax(t)])
        })
        .sum();
    total / batch.len() as f64
}

/// Largest relative disagreement between [`backward`] (dropout off) and
/// central finite differences with step `eps`, over every parameter.
///
/// The relative error is `|a - n| / max(|a| + |n|, 1e-6)`; the floor keeps
/// parameters whose true gradient is zero from dividing noise by noise.
pub fn gradient_check(
    params: &ModelParameters,
    batch: &[LabeledPair],
    class_weights: &[f64],
    eps: f64,
) -> Result<f64> {
    let (analytic, _) = backward(params, batch, class_weights, None)?;
    let mut probe = params.clone();
    let mut worst: f64 = 0.0;
    for (slot, grad) in analytic.tensors().iter().enumerate() {
        for idx in 0..grad.len() {
            let orig = probe.tensors_mut()[slot][idx];
            probe.tensors_mut()[slot][idx] = orig + eps;
            let plus = batch_loss(&probe, batch, class_weights);
            probe.tensors_mut()[slot][idx] = orig - eps;
            let minus = batch_loss(&probe, batch, class_weights);
            probe.tensors_mut()[slot][idx] = orig;
            let numeric = (plus - minus) / (2.0 * eps);
            let a = grad[idx];
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ClassId, DrugIdx};
    use crate::model::{init_model, Hyperparameters};
    use crate::rng::Rng;
    use rand::{Rng as _, SeedableRng};

    fn tiny(seed: u64) -> (ModelParameters, Vec<LabeledPair>) {
        let hp = Hyperparameters {
            embedding_dim: 3,
            seed,
            ..Default::default()
        };
        let mut p = init_model(5, 4, &hp).unwrap();
        let mut rng = Rng::seed_from_u64(seed);
        p.b.iter_mut()
            .for_each(|x| *x = rng.random_range(-0.5..0.5));
        p.c.iter_mut()
            .for_each(|x| *x = rng.random_range(-0.5..0.5));
        p.u.iter_mut().for_each(|x| *x = rng.random_range(0.5..1.5));
        let mut batch = Vec::new();
        for _ in 0..6 {
            let i = rng.random_range(0..5);
            let mut j = rng.random_range(0..5);
            if j == i {
                j = (i + 1) % 5;
            }
            let raw: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
            let s: f64 = raw.iter().sum();
            let target = SoftTarget::from_probs(raw.iter().map(|x| x / s).collect()).unwrap();
            batch.push(LabeledPair {
                i: DrugIdx(i),
                j: DrugIdx(j),
                label: target.argmax(),
                target,
            });
        }
        (p, batch)
    }

    #[test]
    fn loss_examples() {
        let t = vec![SoftTarget::one_hot(4, ClassId(2))];
        let w = [1.0; 4];
        let perfect = vec![vec![0.0, 0.0, 1.0, 0.0]];
        assert!(loss(&perfect, &t, &w).unwrap() <= 1e-10);
        let uniform = vec![vec![0.25; 4]];
        let l = loss(&uniform, &t, &w).unwrap();
        assert!((l - libm::log(4.0)).abs() < 1e-12);
        assert!((l - 1.3863).abs() < 1e-4);
        let doubled = loss(&uniform, &t, &[2.0; 4]).unwrap();
        assert_eq!(doubled, 2.0 * l);
        assert!(matches!(
            loss(&uniform, &[], &w),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for seed in 0..5 {
            let (p, batch) = tiny(seed);
            let err = gradient_check(&p, &batch, &[1.0, 2.0, 0.5, 1.5], 1e-5).unwrap();
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }

    #[test]
    fn halving_eps_is_stable() {
        let (p, batch) = tiny(11);
        let w = [1.0; 4];
        let a = gradient_check(&p, &batch, &w, 1e-5).unwrap();
        let b = gradient_check(&p, &batch, &w, 5e-6).unwrap();
        assert!(b <= 10.0 * a.max(1e-12), "{a} -> {b}");
    }

    #[test]
    fn zero_model_uniform_target() {
        let p = ModelParameters::zeros(4, 3, 2);
        let batch = vec![LabeledPair {
            i: DrugIdx(0),
            j: DrugIdx(1),
            label: ClassId(0),
            target: SoftTarget::uniform(3),
        }];
        let (g, _) = backward(&p, &batch, &[1.0; 3], None).unwrap();
        assert!(g
            .tensors()
            .iter()
            .all(|t| t.iter().all(|x| x.abs() < 1e-15)));
        assert!(gradient_check(&p, &batch, &[1.0; 3], 1e-5).unwrap() < 1e-4);
    }

    #[test]
    fn untouched_rows_have_zero_gradient() {
        let (p, _) = tiny(3);
        let batch = vec![LabeledPair::hard(DrugIdx(1), DrugIdx(3), ClassId(2), 4)];
        let (g, _) = backward(&p, &batch, &[1.0; 4], None).unwrap();
        for r in [0, 2, 4] {
            assert!(g.e[r * 3..(r + 1) * 3].iter().all(|&x| x == 0.0));
            assert_eq!(g.b[r], 0.0);
        }
        assert!(g.e[3..6].iter().any(|&x| x != 0.0));
    }

    #[test]
    fn duplicated_batch_has_same_mean_gradient() {
        let (p, batch) = tiny(4);
        let w = [1.0; 4];
        let (g1, l1) = backward(&p, &batch, &w, None).unwrap();
        let doubled: Vec<LabeledPair> = batch.iter().chain(batch.iter()).cloned().collect();
        let (g2, l2) = backward(&p, &doubled, &w, None).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
        for (a, b) in g1.tensors().iter().zip(g2.tensors().iter()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empty_batch_is_an_error() {
        let (p, _) = tiny(0);
        assert_eq!(
            backward(&p, &[], &[1.0; 4], None).unwrap_err(),
            Error::EmptyBatch
        );
    }
}
