use topicsim_core::harness::{hash_tree, run_experiment, ExperimentSpec};
use topicsim_core::vb::vb_run;
use topicsim_core::{
    cv_score, generate_corpus, gibbs_fit, vb_fit, CoherenceConfig, Corpus, DirichletHyperparams,
    GibbsConfig, Preset, VbConfig,
};

fn corpus(preset: Preset, m: usize, seed: u64) -> Corpus {
    generate_corpus(&preset.generator(m, seed)).unwrap().0
}

#[test]
fn single_topic_fits_are_closed_form() {
    for seed in 0..4 {
        let preset = if seed % 2 == 0 {
            Preset::Smaller
        } else {
            Preset::Larger
        };
        let c = corpus(preset, 8 + seed as usize, seed);
        let hyper = preset.hyper();
        let counts = c.word_counts();
        let v = c.vocab_size() as f64;

        let mut g = GibbsConfig::new(1, hyper, seed);
        g.iterations = 100;
        let fit = gibbs_fit(&c, &g).unwrap();
        let denom = c.total_tokens() as f64 + v * hyper.beta;
        for (w, &n) in counts.iter().enumerate() {
            assert_eq!(fit.phi_hat[[0, w]], (n as f64 + hyper.beta) / denom);
        }
        assert!(fit.theta_hat.iter().all(|&x| x == 1.0));

        let fit = vb_fit(&c, &VbConfig::new(1, hyper, seed)).unwrap();
        let lambda: Vec<f64> = counts.iter().map(|&n| n as f64 + hyper.beta).collect();
        let total: f64 = lambda.iter().sum();
        for (w, l) in lambda.iter().enumerate() {
            assert_eq!(fit.phi_hat[[0, w]], l / total);
        }
        assert!(fit.theta_hat.iter().all(|&x| x == 1.0));
    }
}

#[test]
fn elbo_never_decreases() {
    for (i, preset) in [Preset::Smaller, Preset::Larger].into_iter().enumerate() {
        let c = corpus(preset, 20, 40 + i as u64);
        let k = preset.generator(1, 0).k;
        let mut cfg = VbConfig::new(k, preset.hyper(), 3);
        cfg.epochs = 30;
        cfg.elbo_tol = 0.0;
        let state = vb_run(&c, &cfg).unwrap();
        assert_eq!(state.elbo_trace.len(), 30);
        for w in state.elbo_trace.windows(2) {
            assert!(w[1] - w[0] >= -1e-8 * w[0].abs(), "{w:?}");
        }
    }
}

#[test]
fn gibbs_recovers_smaller_preset_topics() {
    let (c, truth) = generate_corpus(&Preset::Smaller.generator(100, 5)).unwrap();
    let mut cfg = Preset::Smaller.gibbs(7, 1);
    cfg.iterations = 1000;
    let fit = gibbs_fit(&c, &cfg).unwrap();
    let report = topicsim_core::align_topics(&truth.phi, &fit.phi_hat).unwrap();
    assert!(report.average_kld < 0.3, "{}", report.average_kld);
    let mut picked = report.alignment.clone();
    picked.sort_unstable();
    picked.dedup();
    assert_eq!(picked.len(), 7, "{:?}", report.alignment);
}

#[test]
fn coherence_scores_are_bounded() {
    let c = corpus(Preset::Smaller, 30, 2);
    let mut cfg = Preset::Smaller.vb(7, 1);
    cfg.epochs = 20;
    let fit = vb_fit(&c, &cfg).unwrap();
    let report = cv_score(&fit.phi_hat, &c, &CoherenceConfig::default()).unwrap();
    assert_eq!(report.per_topic.len(), 7);
    assert!(report.per_topic.iter().all(|s| (-1.0..=1.0).contains(s)));
}

fn small_spec(out: &std::path::Path) -> ExperimentSpec {
    let mut spec = ExperimentSpec::from_preset(Preset::Smaller, 21, true, out.to_path_buf());
    spec.m_values = vec![10, 15];
    spec.group_size = 3;
    spec.gibbs.iterations = 100;
    spec.vb.epochs = 15;
    spec
}

#[test]
fn worker_count_does_not_change_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let one = run_experiment(&small_spec(a.path()), 1).unwrap();
    let three = run_experiment(&small_spec(b.path()), 3).unwrap();
    assert_eq!(one, three);
    assert_eq!(hash_tree(a.path()).unwrap(), hash_tree(b.path()).unwrap());
    assert_eq!(one.summaries.len(), 4);
    assert_eq!(one.summaries[0].values.len(), 3);
}

#[test]
fn hyperparameters_are_validated() {
    assert!(DirichletHyperparams::new(0.0, 0.1).is_err());
    assert!(DirichletHyperparams::new(0.1, f64::NAN).is_err());
}
