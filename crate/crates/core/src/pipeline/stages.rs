use super::config::PipelineConfig;
use super::search::{score_split, selection_score};
use super::state::{ClusterDims, ClusterSpec, EvalEvent, PipelineState, Stage};
use super::{epoch_batches, gather, stream};
use crate::cluster::{fit, KMeansConfig};
use crate::data::EncodedSample;
use crate::error::{Error, Result};
use crate::gates::{deterministic_mask, gate_probs};
use crate::numeric::RngStream;
use crate::recommender::{apply_mask, ModelRole, RecommenderModel};

/// Base representation with the deterministic searched mask applied.
pub fn masked_representation(state: &PipelineState, sample: &EncodedSample) -> Result<Vec<f64>> {
    let (e, m) = represent_and_mask(state, sample)?;
    apply_mask(&e, &m)
}

fn represent_and_mask(state: &PipelineState, sample: &EncodedSample) -> Result<(Vec<f64>, Vec<bool>)> {
    let e = state.base.represent(sample)?;
    let m = deterministic_mask(&gate_probs(&e, state.gate()?)?).bits;
    Ok((e, m))
}

/// Cluster id a sample is routed to.
pub fn route(state: &PipelineState, sample: &EncodedSample) -> Result<usize> {
    state.kmeans()?.assign(&masked_representation(state, sample)?)
}

/// Fit K-means on the masked training representations and derive per-cluster widths.
pub fn cluster_stage(mut state: PipelineState, train: &[EncodedSample]) -> Result<PipelineState> {
    state.require(Stage::Searched)?;
    let config = &state.config;
    let points = train
        .iter()
        .map(|s| masked_representation(&state, s))
        .collect::<Result<Vec<_>>>()?;
    let seed = RngStream::new(config.seed).fork(stream::CLUSTER).seed();
    let km = KMeansConfig {
        k: config.k,
        batch_size: config.batch_size,
        max_epochs: config.kmeans_max_epochs,
        tol: config.kmeans_tol,
        seed,
    };
    let report = fit(&points, &km)?;
    state.kmeans = Some(report.model);
    state.spec = None;
    state.cluster_models.clear();
    let spec = derive_cluster_dims(train, &state)?;
    state.spec = Some(spec);
    state.stage = Stage::Clustered;
    Ok(state)
}

/// Mean deterministic mask per cluster; a dimension is kept when its mean
/// reaches the majority threshold.
pub fn derive_cluster_dims(train: &[EncodedSample], state: &PipelineState) -> Result<ClusterSpec> {
    let km = state.kmeans()?;
    let width = state.base.input_width();
    let field_widths = state.base.widths();
    let mut sums = vec![vec![0.0; width]; km.k()];
    let mut sizes = vec![0usize; km.k()];
    for s in train {
        let (e, m) = represent_and_mask(state, s)?;
        let c = km.assign(&apply_mask(&e, &m)?)?;
        sizes[c] += 1;
        for (acc, &b) in sums[c].iter_mut().zip(&m) {
            if b {
                *acc += 1.0;
            }
        }
    }
    let mut clusters = Vec::with_capacity(km.k());
    for (c, (sum, &size)) in sums.into_iter().zip(&sizes).enumerate() {
        if size == 0 {
            return Err(Error::Pipeline(format!("cluster {c} has no training samples")));
        }
        let mean_mask: Vec<f64> = sum.iter().map(|v| v / size as f64).collect();
        let selected: Vec<bool> = mean_mask.iter().map(|&v| v >= state.config.majority).collect();
        let mut widths = Vec::with_capacity(field_widths.len());
        let mut offset = 0;
        for &w in &field_widths {
            widths.push(selected[offset..offset + w].iter().filter(|&&b| b).count());
            offset += w;
        }
        if widths.iter().all(|&w| w == 0) {
            return Err(Error::Pipeline(format!("cluster {c} keeps no embedding dimension")));
        }
        clusters.push(ClusterDims {
            widths,
            mean_mask,
            selected,
            size,
        });
    }
    Ok(ClusterSpec { clusters })
}

/// Train a fresh model of the given widths with early stopping on validation AUC.
/// Returns the best model and its per-epoch log.
pub(crate) fn fit_model(
    role: ModelRole,
    widths: &[usize],
    vocab_sizes: &[usize],
    train: &[EncodedSample],
    val: &[EncodedSample],
    config: &PipelineConfig,
    rng: &mut RngStream,
) -> Result<(RecommenderModel, Vec<EvalEvent>)> {
    let mut model = RecommenderModel::new(role, vocab_sizes, widths, &config.mlp_hidden, config.adam(), rng)?;
    let cluster = match role {
        ModelRole::Cluster(c) => Some(c),
        ModelRole::Base => None,
    };
    let mut log = Vec::new();
    let mut best: Option<(f64, RecommenderModel)> = None;
    let mut stale = 0usize;
    for epoch in 0..config.max_retrain_epochs {
        let mut total = 0.0;
        for idx in epoch_batches(train.len(), config.batch_size, rng) {
            total += model.train_step(&gather(train, &idx), None)? * idx.len() as f64;
        }
        let (val_logloss, val_auc) = score_split(val, |s| model.predict(s, None))?;
        log.push(EvalEvent {
            stage: "retrain".into(),
            cluster,
            epoch,
            train_loss: total / train.len() as f64,
            val_logloss,
            val_auc,
            open_fraction: None,
            gate_steps: None,
        });
        let score = selection_score(val_logloss, val_auc);
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            best = Some((score, model.clone()));
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }
    Ok((best.expect("at least one epoch").1, log))
}

/// Train one fresh reduced-width model per cluster on the samples routed to it.
pub fn retrain_stage(
    mut state: PipelineState,
    train: &[EncodedSample],
    val: &[EncodedSample],
) -> Result<PipelineState> {
    state.require(Stage::Clustered)?;
    let spec = state.cluster_spec()?.clone();
    let k = spec.k();
    let mut train_parts: Vec<Vec<EncodedSample>> = vec![Vec::new(); k];
    let mut val_parts: Vec<Vec<EncodedSample>> = vec![Vec::new(); k];
    for s in train {
        train_parts[route(&state, s)?].push(s.clone());
    }
    for s in val {
        val_parts[route(&state, s)?].push(s.clone());
    }
    let root = RngStream::new(state.config.seed).fork(stream::RETRAIN);
    let mut models = Vec::with_capacity(k);
    for (c, dims) in spec.clusters.iter().enumerate() {
        if train_parts[c].len() < state.config.batch_size {
            return Err(Error::Pipeline(format!(
                "cluster {c} has {} training samples, less than one batch of {}",
                train_parts[c].len(),
                state.config.batch_size
            )));
        }
        if val_parts[c].is_empty() {
            return Err(Error::Pipeline(format!("cluster {c} has no validation samples")));
        }
        let mut rng = root.fork(c as u64);
        let (model, log) = fit_model(
            ModelRole::Cluster(c),
            &dims.widths,
            &state.vocab_sizes,
            &train_parts[c],
            &val_parts[c],
            &state.config,
            &mut rng,
        )?;
        state.log.extend(log);
        models.push(model);
    }
    state.cluster_models = models;
    state.stage = Stage::Retrained;
    Ok(state)
}

/// A fresh full-width model trained like a cluster model, with no dimension search.
pub fn train_full_model(
    train: &[EncodedSample],
    val: &[EncodedSample],
    vocab_sizes: &[usize],
    config: &PipelineConfig,
) -> Result<RecommenderModel> {
    config.validate()?;
    let widths = vec![config.embed_dim; vocab_sizes.len()];
    let mut rng = RngStream::new(config.seed).fork(stream::REFERENCE);
    let (model, _) = fit_model(ModelRole::Base, &widths, vocab_sizes, train, val, config, &mut rng)?;
    Ok(model)
}
