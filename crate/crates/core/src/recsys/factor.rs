//! Latent-factor models: pointwise squared-loss MF and pairwise BPR.
//!
//! Both use 32-dimensional factors by default and Adam updates applied
//! sparsely to the rows touched by each sample. Epoch-mean loss drives
//! early stopping: training stops once the loss has failed to improve on
//! the best seen value (by more than `loss_tol`) for `patience` consecutive
//! epochs, or at `max_epochs`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::types::{UserId, VenueId};

use super::{InteractionMatrix, TrainingHyper};

/// Dense factor matrices indexed by catalog ids.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FactorState {
    pub factors: usize,
    pub user_f: Vec<f64>,
    pub venue_f: Vec<f64>,
}

impl FactorState {
    #[inline]
    fn user_vec(&self, u: UserId) -> &[f64] {
        let base = u.idx() * self.factors;
        &self.user_f[base..base + self.factors]
    }

    #[inline]
    fn venue_vec(&self, v: VenueId) -> &[f64] {
        let base = v.idx() * self.factors;
        &self.venue_f[base..base + self.factors]
    }

    pub fn scores(&self, user: UserId, candidates: &[VenueId]) -> Vec<f64> {
        let pu = self.user_vec(user);
        candidates
            .iter()
            .map(|&v| dot(pu, self.venue_vec(v)))
            .collect()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn sq_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// ln(1 + e^x), stable for large |x|.
#[inline]
fn softplus(x: f64) -> f64 {
    if x > 35.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// Pointwise squared loss for one (user, venue, target) sample:
/// `(p·q − target)² + l2·(‖p‖² + ‖q‖²)`.
pub fn mf_sample_loss(pu: &[f64], qv: &[f64], target: f64, l2: f64) -> f64 {
    let e = dot(pu, qv) - target;
    e * e + l2 * (sq_norm(pu) + sq_norm(qv))
}

/// Gradient of [`mf_sample_loss`] with respect to `pu` and `qv`.
pub fn mf_sample_grad(pu: &[f64], qv: &[f64], target: f64, l2: f64) -> (Vec<f64>, Vec<f64>) {
    let e = dot(pu, qv) - target;
    let gp = pu
        .iter()
        .zip(qv)
        .map(|(p, q)| 2.0 * e * q + 2.0 * l2 * p)
        .collect();
    let gq = pu
        .iter()
        .zip(qv)
        .map(|(p, q)| 2.0 * e * p + 2.0 * l2 * q)
        .collect();
    (gp, gq)
}

/// Pairwise ranking loss for one (user, positive, negative) triple:
/// `−ln σ(p·qi − p·qj) + l2·(‖p‖² + ‖qi‖² + ‖qj‖²)`.
pub fn bpr_triple_loss(pu: &[f64], qi: &[f64], qj: &[f64], l2: f64) -> f64 {
    let x = dot(pu, qi) - dot(pu, qj);
    softplus(-x) + l2 * (sq_norm(pu) + sq_norm(qi) + sq_norm(qj))
}

/// Gradient of [`bpr_triple_loss`] with respect to `pu`, `qi`, `qj`.
pub fn bpr_triple_grad(
    pu: &[f64],
    qi: &[f64],
    qj: &[f64],
    l2: f64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let x = dot(pu, qi) - dot(pu, qj);
    let s = sigmoid(-x);
    let gu = pu
        .iter()
        .zip(qi.iter().zip(qj))
        .map(|(p, (i, j))| -s * (i - j) + 2.0 * l2 * p)
        .collect();
    let gi = pu
        .iter()
        .zip(qi)
        .map(|(p, i)| -s * p + 2.0 * l2 * i)
        .collect();
    let gj = pu
        .iter()
        .zip(qj)
        .map(|(p, j)| s * p + 2.0 * l2 * j)
        .collect();
    (gu, gi, gj)
}

/// Adam with a per-row step counter (rows are updated sparsely).
struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    step: Vec<u32>,
    lr: f64,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

impl Adam {
    fn new(rows: usize, dim: usize, lr: f64) -> Adam {
        Adam {
            m: vec![0.0; rows * dim],
            v: vec![0.0; rows * dim],
            step: vec![0; rows],
            lr,
        }
    }

    fn update(&mut self, row: usize, dim: usize, params: &mut [f64], grad: &[f64]) {
        self.step[row] += 1;
        let t = self.step[row] as i32;
        let bc1 = 1.0 - BETA1.powi(t);
        let bc2 = 1.0 - BETA2.powi(t);
        let base = row * dim;
        for j in 0..dim {
            let g = grad[j];
            let i = base + j;
            self.m[i] = BETA1 * self.m[i] + (1.0 - BETA1) * g;
            self.v[i] = BETA2 * self.v[i] + (1.0 - BETA2) * g * g;
            let mhat = self.m[i] / bc1;
            let vhat = self.v[i] / bc2;
            params[base + j] -= self.lr * mhat / (vhat.sqrt() + EPS);
        }
    }
}

fn init_factors(n: usize, dim: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n * dim).map(|_| rng.gen_range(-scale..scale)).collect()
}

struct EarlyStop {
    best: f64,
    bad_epochs: usize,
    patience: usize,
    tol: f64,
}

impl EarlyStop {
    fn new(patience: usize, tol: f64) -> EarlyStop {
        EarlyStop {
            best: f64::INFINITY,
            bad_epochs: 0,
            patience,
            tol,
        }
    }

    /// Returns true when training should stop.
    fn observe(&mut self, loss: f64) -> bool {
        if loss < self.best - self.tol {
            self.best = loss;
            self.bad_epochs = 0;
        } else {
            self.bad_epochs += 1;
        }
        self.bad_epochs >= self.patience
    }
}

/// Positive pairs in catalog-id space, in matrix order.
fn positive_pairs(m: &InteractionMatrix) -> Vec<(u32, u32)> {
    let mut pairs = Vec::with_capacity(m.nnz());
    for r in 0..m.n_users() as u32 {
        let u = m.users()[r as usize].0;
        for &c in m.row(r) {
            pairs.push((u, m.venues()[c as usize].0));
        }
    }
    pairs
}

/// Draw a venue the user has not interacted with, uniformly over the
/// catalog.
fn sample_negative(
    m: &InteractionMatrix,
    user_row: u32,
    n_venues: usize,
    rng: &mut ChaCha8Rng,
) -> u32 {
    loop {
        let v = rng.gen_range(0..n_venues as u32);
        // candidate is negative unless (user, v) is a train positive
        let is_positive = m
            .venue_col_of(VenueId(v))
            .map(|c| m.has(user_row, c))
            .unwrap_or(false);
        if !is_positive {
            return v;
        }
    }
}

/// Squared-loss matrix factorization with one sampled negative per
/// positive per epoch. Returns the state and the epoch-mean losses.
pub fn train_mf(
    m: &InteractionMatrix,
    n_users: usize,
    n_venues: usize,
    hyper: &TrainingHyper,
    rng: &mut ChaCha8Rng,
) -> (FactorState, Vec<f64>) {
    let dim = hyper.factors;
    let mut user_f = init_factors(n_users, dim, hyper.init_scale, rng);
    let mut venue_f = init_factors(n_venues, dim, hyper.init_scale, rng);
    let mut adam_u = Adam::new(n_users, dim, hyper.learning_rate);
    let mut adam_v = Adam::new(n_venues, dim, hyper.learning_rate);

    let mut pairs = positive_pairs(m);
    let mut stop = EarlyStop::new(hyper.patience, hyper.loss_tol);
    let mut losses = Vec::new();

    for _epoch in 0..hyper.max_epochs {
        pairs.shuffle(rng);
        let mut loss_sum = 0.0;
        let mut samples = 0u64;
        for &(u, v) in &pairs {
            let row = m.row_of(UserId(u)).expect("user in matrix");
            let neg = sample_negative(m, row, n_venues, rng);
            for (venue, target) in [(v, 1.0), (neg, 0.0)] {
                let ub = u as usize * dim;
                let vb = venue as usize * dim;
                let (gp, gq) = mf_sample_grad(
                    &user_f[ub..ub + dim],
                    &venue_f[vb..vb + dim],
                    target,
                    hyper.l2,
                );
                loss_sum += mf_sample_loss(
                    &user_f[ub..ub + dim],
                    &venue_f[vb..vb + dim],
                    target,
                    hyper.l2,
                );
                adam_u.update(u as usize, dim, &mut user_f, &gp);
                adam_v.update(venue as usize, dim, &mut venue_f, &gq);
                samples += 1;
            }
        }
        let epoch_loss = loss_sum / samples.max(1) as f64;
        losses.push(epoch_loss);
        if stop.observe(epoch_loss) {
            break;
        }
    }

    (
        FactorState {
            factors: dim,
            user_f,
            venue_f,
        },
        losses,
    )
}

/// BPR matrix factorization with mini-batches of triples. Returns the
/// state and the epoch-mean losses.
pub fn train_bpr(
    m: &InteractionMatrix,
    n_users: usize,
    n_venues: usize,
    hyper: &TrainingHyper,
    rng: &mut ChaCha8Rng,
) -> (FactorState, Vec<f64>) {
    let dim = hyper.factors;
    let mut user_f = init_factors(n_users, dim, hyper.init_scale, rng);
    let mut venue_f = init_factors(n_venues, dim, hyper.init_scale, rng);
    let mut adam_u = Adam::new(n_users, dim, hyper.learning_rate);
    let mut adam_v = Adam::new(n_venues, dim, hyper.learning_rate);

    let mut pairs = positive_pairs(m);
    let mut stop = EarlyStop::new(hyper.patience, hyper.loss_tol);
    let mut losses = Vec::new();

    for _epoch in 0..hyper.max_epochs {
        pairs.shuffle(rng);
        let mut loss_sum = 0.0;
        for batch in pairs.chunks(hyper.batch_size.max(1)) {
            // accumulate mean gradients per touched row
            let mut user_grads: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
            let mut venue_grads: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
            let scale = 1.0 / batch.len() as f64;
            for &(u, i) in batch {
                let row = m.row_of(UserId(u)).expect("user in matrix");
                let j = sample_negative(m, row, n_venues, rng);
                let ub = u as usize * dim;
                let ib = i as usize * dim;
                let jb = j as usize * dim;
                loss_sum += bpr_triple_loss(
                    &user_f[ub..ub + dim],
                    &venue_f[ib..ib + dim],
                    &venue_f[jb..jb + dim],
                    hyper.l2,
                );
                let (gu, gi, gj) = bpr_triple_grad(
                    &user_f[ub..ub + dim],
                    &venue_f[ib..ib + dim],
                    &venue_f[jb..jb + dim],
                    hyper.l2,
                );
                axpy(user_grads.entry(u).or_insert_with(|| vec![0.0; dim]), &gu, scale);
                axpy(venue_grads.entry(i).or_insert_with(|| vec![0.0; dim]), &gi, scale);
                axpy(venue_grads.entry(j).or_insert_with(|| vec![0.0; dim]), &gj, scale);
            }
            for (u, g) in user_grads {
                adam_u.update(u as usize, dim, &mut user_f, &g);
            }
            for (v, g) in venue_grads {
                adam_v.update(v as usize, dim, &mut venue_f, &g);
            }
        }
        let epoch_loss = loss_sum / pairs.len().max(1) as f64;
        losses.push(epoch_loss);
        if stop.observe(epoch_loss) {
            break;
        }
    }

    (
        FactorState {
            factors: dim,
            user_f,
            venue_f,
        },
        losses,
    )
}

#[inline]
fn axpy(acc: &mut [f64], g: &[f64], scale: f64) {
    for (a, &x) in acc.iter_mut().zip(g) {
        *a += x * scale;
    }
}
