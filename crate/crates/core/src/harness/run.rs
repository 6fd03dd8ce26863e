use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::manifest::Manifest;
use super::stats::GroupSummary;
use super::svg::{emit_boxplot, emit_wordtopic_plot, render_boxplot, BoxGlyph};
use super::*;
use crate::corpus_io::{write_corpus, DICTIONARY_FILE, DOCS_FILE, GROUND_TRUTH_FILE};
use crate::error::{Error, Result};
use crate::eval::{align_topics, cv_score};
use crate::fit::{Algorithm, FitResult};
use crate::gibbs::gibbs_fit;
use crate::json;
use crate::rng::derive_seed;
use crate::simgen::{generate_corpus, group_member_config};
use crate::types::{Corpus, GroundTruthModel};
use crate::vb::vb_fit;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub summaries: Vec<GroupSummary>,
    pub manifest: Manifest,
}

/// C_v summary for one swept K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSummary {
    #[serde(rename = "K")]
    pub k: usize,
    pub summary: GroupSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub summaries: Vec<CoherenceSummary>,
    pub manifest: Manifest,
}

/// Creates the tree root and proves it is writable.
fn prepare_output(root: &Path) -> Result<()> {
    std::fs::create_dir_all(root)?;
    tempfile::NamedTempFile::new_in(root)?;
    Ok(())
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Internal(format!("worker pool: {e}")))
}

fn rel(m: usize, index: usize, file: &str) -> String {
    format!("{m}/{index}/{file}")
}

fn fit(
    spec: &ExperimentSpec,
    corpus: &Corpus,
    algorithm: Algorithm,
    k: usize,
    seed: u64,
) -> Result<FitResult> {
    let result = match algorithm {
        Algorithm::Gibbs => {
            let mut cfg = spec.gibbs.clone();
            cfg.k = k;
            cfg.seed = seed;
            gibbs_fit(corpus, &cfg)?
        }
        Algorithm::Vb => {
            let mut cfg = spec.vb.clone();
            cfg.k = k;
            cfg.seed = seed;
            vb_fit(corpus, &cfg)?
        }
    };
    Ok(result.without_timing())
}

/// Generates corpus `index` of the group for `m` and writes its files.
fn generate_member(
    spec: &ExperimentSpec,
    root: &Path,
    m: usize,
    index: usize,
    written: &mut Vec<String>,
) -> Result<(Corpus, GroundTruthModel, PathBuf)> {
    let group_seed = derive_seed(spec.master_seed, m as u64);
    let config = group_member_config(&spec.generator_for(m, group_seed), index);
    let (corpus, truth) = generate_corpus(&config)?;
    let dir = root.join(m.to_string()).join(index.to_string());
    std::fs::create_dir_all(&dir)?;
    write_corpus(&dir, &corpus, &truth)?;
    for f in [DOCS_FILE, DICTIONARY_FILE, GROUND_TRUTH_FILE] {
        written.push(rel(m, index, f));
    }
    Ok((corpus, truth, dir))
}

struct KldRecord {
    kld: [f64; 2],
    written: Vec<String>,
}

fn kld_job(spec: &ExperimentSpec, root: &Path, m: usize, index: usize) -> Result<KldRecord> {
    let mut written = Vec::new();
    let (corpus, truth, dir) = generate_member(spec, root, m, index, &mut written)?;
    let mut kld = [0.0; 2];
    for (slot, algorithm) in Algorithm::ALL.into_iter().enumerate() {
        let name = algorithm.as_str();
        let result = fit(
            spec,
            &corpus,
            algorithm,
            truth.num_topics(),
            algorithm.fit_seed(corpus.seed),
        )?;
        let report = align_topics(&truth.phi, &result.phi_hat)?;
        json::write_file(&dir.join(format!("fit_{name}.json")), &result)?;
        json::write_file(&dir.join(format!("eval_{name}.json")), &report)?;
        written.push(rel(m, index, &format!("fit_{name}.json")));
        written.push(rel(m, index, &format!("eval_{name}.json")));
        if index == 0 {
            let file = format!("wordtopic_{name}.svg");
            emit_wordtopic_plot(
                &truth.phi,
                &result.phi_hat,
                &report.alignment,
                report.average_kld,
                &dir.join(&file),
            )?;
            written.push(rel(m, index, &file));
        }
        kld[slot] = report.average_kld;
    }
    Ok(KldRecord { kld, written })
}

fn tasks(spec: &ExperimentSpec) -> Vec<(usize, usize)> {
    spec.m_values
        .iter()
        .flat_map(|&m| (0..spec.group_size).map(move |i| (m, i)))
        .collect()
}

/// Runs every (M, corpus) job on `jobs` workers and writes the full tree
/// under `spec.dataset_dir()`. Results merge in corpus-index order, so the
/// outcome does not depend on scheduling.
pub fn run_experiment(spec: &ExperimentSpec, jobs: usize) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let root = spec.dataset_dir();
    prepare_output(&root)?;
    let tasks = tasks(spec);
    let records: Vec<KldRecord> = pool(jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|&(m, i)| kld_job(spec, &root, m, i))
            .collect::<Result<_>>()
    })?;

    let mut summaries = Vec::new();
    let mut written = Vec::new();
    for (g, &m) in spec.m_values.iter().enumerate() {
        let group = &records[g * spec.group_size..(g + 1) * spec.group_size];
        for (slot, algorithm) in Algorithm::ALL.into_iter().enumerate() {
            let values = group.iter().map(|r| r.kld[slot]).collect();
            summaries.push(GroupSummary::new(m, algorithm, values)?);
        }
        written.extend(group.iter().flat_map(|r| r.written.iter().cloned()));
    }
    json::write_file(&root.join(SUMMARY_FILE), &summaries)?;
    emit_boxplot(&summaries, &root.join(BOXPLOT_FILE))?;
    json::write_file(&root.join(EXPERIMENT_FILE), spec)?;
    written.extend([SUMMARY_FILE, BOXPLOT_FILE, EXPERIMENT_FILE].map(String::from));
    let manifest = Manifest::build(&root, &written)?;
    manifest.write(&root.join(MANIFEST_FILE))?;
    Ok(ExperimentOutcome {
        summaries,
        manifest,
    })
}

struct CoherenceRecord {
    /// Mean C_v per K, per algorithm.
    scores: Vec<[f64; 2]>,
    written: Vec<String>,
}

fn coherence_job(
    spec: &ExperimentSpec,
    ks: &[usize],
    root: &Path,
    m: usize,
    index: usize,
) -> Result<CoherenceRecord> {
    let mut written = Vec::new();
    let (corpus, _, dir) = generate_member(spec, root, m, index, &mut written)?;
    let mut scores = Vec::with_capacity(ks.len());
    for &k in ks {
        let mut row = [0.0; 2];
        for (slot, algorithm) in Algorithm::ALL.into_iter().enumerate() {
            let name = algorithm.as_str();
            let seed = derive_seed(algorithm.fit_seed(corpus.seed), k as u64);
            let result = fit(spec, &corpus, algorithm, k, seed)?;
            let report = cv_score(&result.phi_hat, &corpus, &spec.coherence)?;
            let fit_file = format!("fit_{name}_K{k}.json");
            let cv_file = format!("coherence_{name}_K{k}.json");
            json::write_file(&dir.join(&fit_file), &result)?;
            json::write_file(&dir.join(&cv_file), &report)?;
            written.push(rel(m, index, &fit_file));
            written.push(rel(m, index, &cv_file));
            row[slot] = report.mean;
        }
        scores.push(row);
    }
    Ok(CoherenceRecord { scores, written })
}

/// Plot file for the coherence sweep at `m`.
pub(crate) fn coherence_plot_file(spec: &ExperimentSpec, m: usize) -> String {
    if spec.m_values.len() == 1 {
        "coherence_K.svg".to_string()
    } else {
        format!("coherence_K_M{m}.svg")
    }
}

/// Fits every K in `spec.k_values` to every corpus and summarizes the mean
/// C_v per (M, K, algorithm), scored on the fitting corpus.
pub fn coherence_sweep(spec: &ExperimentSpec, jobs: usize) -> Result<SweepOutcome> {
    spec.validate()?;
    let ks = spec
        .k_values
        .clone()
        .ok_or_else(|| Error::Config("coherence sweep needs a K range".into()))?;
    let root = spec.dataset_dir();
    prepare_output(&root)?;
    let tasks = tasks(spec);
    let records: Vec<CoherenceRecord> = pool(jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|&(m, i)| coherence_job(spec, &ks, &root, m, i))
            .collect::<Result<_>>()
    })?;

    let mut summaries = Vec::new();
    let mut written = Vec::new();
    for (g, &m) in spec.m_values.iter().enumerate() {
        let group = &records[g * spec.group_size..(g + 1) * spec.group_size];
        let mut glyphs = Vec::new();
        for (ki, &k) in ks.iter().enumerate() {
            for (slot, algorithm) in Algorithm::ALL.into_iter().enumerate() {
                let values = group.iter().map(|r| r.scores[ki][slot]).collect();
                let summary = GroupSummary::new(m, algorithm, values)?;
                glyphs.push(BoxGlyph {
                    x: k,
                    algorithm,
                    stats: summary.stats(),
                });
                summaries.push(CoherenceSummary { k, summary });
            }
        }
        written.extend(group.iter().flat_map(|r| r.written.iter().cloned()));
        let file = coherence_plot_file(spec, m);
        let svg = render_boxplot(
            &glyphs,
            &format!("C_v coherence, M = {m}"),
            "K (number of topics)",
            "C_v",
        )?;
        std::fs::write(root.join(&file), svg)?;
        written.push(file);
    }
    json::write_file(&root.join(COHERENCE_SUMMARY_FILE), &summaries)?;
    json::write_file(&root.join(COHERENCE_EXPERIMENT_FILE), spec)?;
    written.extend([COHERENCE_SUMMARY_FILE, COHERENCE_EXPERIMENT_FILE].map(String::from));
    let manifest = Manifest::build(&root, &written)?;
    manifest.write(&root.join(COHERENCE_MANIFEST_FILE))?;
    Ok(SweepOutcome {
        summaries,
        manifest,
    })
}
