use super::config::{GateInit, PipelineConfig};
use super::state::{EvalEvent, PipelineState, Stage};
use super::{epoch_batches, gather, stream};
use crate::data::EncodedSample;
use crate::error::{Error, Result};
use crate::gates::{deterministic_mask, gate_probs, gate_update_step, stochastic_mask, GateParams};
use crate::numeric::RngStream;
use crate::recommender::{apply_mask, auc, logloss, ModelRole, RecommenderModel};

/// Log loss and AUC of `score` over `samples`. AUC is `None` for a single-class set.
pub(crate) fn score_split<F>(samples: &[EncodedSample], mut score: F) -> Result<(f64, Option<f64>)>
where
    F: FnMut(&EncodedSample) -> Result<f64>,
{
    let scores = samples.iter().map(&mut score).collect::<Result<Vec<_>>>()?;
    let labels: Vec<u8> = samples.iter().map(|s| s.label).collect();
    let ll = logloss(&scores, &labels)?;
    let a = match auc(&scores, &labels) {
        Ok(v) => Some(v),
        Err(Error::MetricUndefined(_)) => None,
        Err(e) => return Err(e),
    };
    Ok((ll, a))
}

/// Early-stopping score: AUC when defined, otherwise negated log loss.
pub(crate) fn selection_score(ll: f64, a: Option<f64>) -> f64 {
    a.unwrap_or(-ll)
}

fn require_nonempty(train: &[EncodedSample], val: &[EncodedSample]) -> Result<()> {
    if train.is_empty() {
        return Err(Error::EmptyDataset("training split is empty".into()));
    }
    if val.is_empty() {
        return Err(Error::EmptyDataset("validation split is empty".into()));
    }
    Ok(())
}

/// Train a fresh full-width base model with every gate open.
pub fn pretrain_stage(
    train: &[EncodedSample],
    val: &[EncodedSample],
    vocab_sizes: &[usize],
    config: &PipelineConfig,
) -> Result<PipelineState> {
    config.validate()?;
    require_nonempty(train, val)?;
    let root = RngStream::new(config.seed);
    let mut init_rng = root.fork(stream::BASE_INIT);
    let widths = vec![config.embed_dim; vocab_sizes.len()];
    let mut base = RecommenderModel::new(
        ModelRole::Base,
        vocab_sizes,
        &widths,
        &config.mlp_hidden,
        config.adam(),
        &mut init_rng,
    )?;
    let mut rng = root.fork(stream::PRETRAIN);
    let mut log = Vec::new();
    for epoch in 0..config.pretrain_epochs {
        let mut total = 0.0;
        let batches = epoch_batches(train.len(), config.batch_size, &mut rng);
        for idx in &batches {
            total += base.train_step(&gather(train, idx), None)? * idx.len() as f64;
        }
        let (val_logloss, val_auc) = score_split(val, |s| base.predict(s, None))?;
        log.push(EvalEvent {
            stage: "pretrain".into(),
            cluster: None,
            epoch,
            train_loss: total / train.len() as f64,
            val_logloss,
            val_auc,
            open_fraction: None,
            gate_steps: None,
        });
    }
    Ok(PipelineState {
        stage: Stage::Pretrained,
        config: config.clone(),
        vocab_sizes: vocab_sizes.to_vec(),
        base,
        gate: None,
        kmeans: None,
        spec: None,
        cluster_models: Vec::new(),
        log,
    })
}

/// Alternating model / gate optimization over one base model and one gate.
///
/// Training batches update only the base model, with sampled masks held
/// constant. Gate batches update only the gate, against the frozen model.
pub struct SearchRunner<'c> {
    pub base: RecommenderModel,
    pub gate: GateParams,
    config: &'c PipelineConfig,
    rng: RngStream,
    val_order: Vec<usize>,
    val_cursor: usize,
    train_batches: usize,
}

impl<'c> SearchRunner<'c> {
    pub fn new(base: RecommenderModel, gate: GateParams, config: &'c PipelineConfig, rng: RngStream) -> Result<Self> {
        if gate.width() != base.input_width() {
            return Err(Error::shape("gate width", base.input_width(), gate.width()));
        }
        Ok(SearchRunner {
            base,
            gate,
            config,
            rng,
            val_order: Vec::new(),
            val_cursor: 0,
            train_batches: 0,
        })
    }

    /// Stochastic masks from the current gate, one per sample.
    pub fn sample_masks(&mut self, batch: &[&EncodedSample]) -> Result<Vec<Vec<bool>>> {
        batch
            .iter()
            .map(|s| {
                let p = gate_probs(&self.base.represent(s)?, &self.gate)?;
                Ok(stochastic_mask(&p, self.config.tau, &mut self.rng).mask.bits)
            })
            .collect()
    }

    /// One base-model step on a training batch. The gate is not touched.
    pub fn train_batch(&mut self, batch: &[&EncodedSample]) -> Result<f64> {
        let masks = self.sample_masks(batch)?;
        self.train_batches += 1;
        self.base.train_step(batch, Some(&masks))
    }

    /// One gate step on a validation batch. The base model is not touched.
    pub fn gate_batch(&mut self, batch: &[&EncodedSample]) -> Result<f64> {
        gate_update_step(
            &mut self.gate,
            batch,
            &self.base,
            self.config.tau,
            self.config.objective(),
            &mut self.rng,
        )
    }

    /// Next validation batch, cycling through a reshuffled order.
    fn next_val_batch<'v>(&mut self, val: &'v [EncodedSample]) -> Vec<&'v EncodedSample> {
        let want = self.config.batch_size.min(val.len());
        let mut out = Vec::with_capacity(want);
        while out.len() < want {
            if self.val_cursor >= self.val_order.len() {
                self.val_order = self.rng.permutation(val.len());
                self.val_cursor = 0;
            }
            out.push(&val[self.val_order[self.val_cursor]]);
            self.val_cursor += 1;
        }
        out
    }

    /// Train on one batch and take a gate step when the schedule calls for one.
    pub fn step(&mut self, batch: &[&EncodedSample], val: &[EncodedSample]) -> Result<f64> {
        let loss = self.train_batch(batch)?;
        if self.train_batches.is_multiple_of(self.config.val_every) {
            let vb = self.next_val_batch(val);
            self.gate_batch(&vb)?;
        }
        Ok(loss)
    }

    pub fn deterministic_mask(&self, sample: &EncodedSample) -> Result<Vec<bool>> {
        let p = gate_probs(&self.base.represent(sample)?, &self.gate)?;
        Ok(deterministic_mask(&p).bits)
    }

    /// Validation log loss and AUC under deterministic masks, plus the mean open fraction.
    pub fn validate(&self, val: &[EncodedSample]) -> Result<(f64, Option<f64>, f64)> {
        let mut open = 0usize;
        let (ll, a) = score_split(val, |s| {
            let e = self.base.represent(s)?;
            let m = deterministic_mask(&gate_probs(&e, &self.gate)?).bits;
            open += m.iter().filter(|&&b| b).count();
            self.base.predict_representation(&apply_mask(&e, &m)?)
        })?;
        let frac = open as f64 / (val.len() * self.gate.width()).max(1) as f64;
        Ok((ll, a, frac))
    }
}

/// Initialize gates on a pretrained model and run the alternating search
/// until validation AUC stops improving. The final state is kept.
pub fn search_from_pretrained(
    mut state: PipelineState,
    train: &[EncodedSample],
    val: &[EncodedSample],
) -> Result<PipelineState> {
    state.require(Stage::Pretrained)?;
    require_nonempty(train, val)?;
    let config = state.config.clone();
    config.validate()?;
    let root = RngStream::new(config.seed);
    let width = state.base.input_width();
    let gate = match config.gate_init {
        GateInit::Zero => GateParams::zeros(width, config.adam()),
        GateInit::Uniform => GateParams::uniform(width, config.adam(), &mut root.fork(stream::GATE_INIT)),
    };
    let mut rng = root.fork(stream::SEARCH);
    let runner_rng = rng.fork(0);
    let mut runner = SearchRunner::new(state.base.clone(), gate, &config, runner_rng)?;

    let mut best = f64::NEG_INFINITY;
    let mut stale = 0usize;
    for epoch in 0..config.max_search_epochs {
        let mut total = 0.0;
        for idx in epoch_batches(train.len(), config.batch_size, &mut rng) {
            total += runner.step(&gather(train, &idx), val)? * idx.len() as f64;
        }
        let (val_logloss, val_auc, open) = runner.validate(val)?;
        state.log.push(EvalEvent {
            stage: "search".into(),
            cluster: None,
            epoch,
            train_loss: total / train.len() as f64,
            val_logloss,
            val_auc,
            open_fraction: Some(open),
            gate_steps: Some(runner.gate.steps_taken()),
        });
        let score = selection_score(val_logloss, val_auc);
        if score > best {
            best = score;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }
    state.base = runner.base;
    state.gate = Some(runner.gate);
    state.kmeans = None;
    state.spec = None;
    state.cluster_models.clear();
    state.stage = Stage::Searched;
    Ok(state)
}

/// Pretrain, then search.
pub fn search_stage(
    train: &[EncodedSample],
    val: &[EncodedSample],
    vocab_sizes: &[usize],
    config: &PipelineConfig,
) -> Result<PipelineState> {
    let pre = pretrain_stage(train, val, vocab_sizes, config)?;
    search_from_pretrained(pre, train, val)
}
