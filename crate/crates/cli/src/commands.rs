use std::io::Write;
use std::path::{Path, PathBuf};

use topicsim_core::corpus_io::{read_corpus, read_ground_truth, write_corpus};
use topicsim_core::harness::{
    coherence_sweep, run_experiment, verify, CoherenceSummary, ExperimentSpec, GroupSummary,
    DEFAULT_M_VALUES,
};
use topicsim_core::{
    align_topics, generate_corpus, gibbs_fit, json, vb_fit, Algorithm, DirichletHyperparams,
    FitResult, GeneratorConfig, GibbsConfig, GibbsEstimator, Preset, VbConfig,
};

use crate::args::*;
use crate::config::{ConfigFile, GeneratorSection, GibbsSection, HyperSection, VbSection};
use crate::service;
use crate::CliError;

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Fit(a) => fit(a),
        Command::Eval(a) => eval(a),
        Command::Experiment(a) => experiment(a),
        Command::Coherence(a) => coherence(a),
        Command::Serve(a) => serve(a),
        Command::Verify(a) => verify_tree(a),
    }
}

fn apply_generator_section(g: &mut GeneratorConfig, s: &GeneratorSection) {
    macro_rules! set {
        ($($field:ident),*) => { $(if let Some(v) = s.$field.clone() { g.$field = v; })* };
    }
    set!(
        m,
        v,
        n,
        k,
        k_m,
        shape,
        overlap,
        function_fraction,
        function_block_fraction,
        function_topic
    );
}

fn generator_config(args: &GeneratorArgs, file: &ConfigFile, seed: Option<u64>) -> GeneratorConfig {
    let preset = args.preset.or(file.preset).unwrap_or(Preset::Smaller);
    let mut g = preset.generator(preset.default_m(), 0);
    apply_generator_section(&mut g, &file.generator);
    macro_rules! set {
        ($($field:ident),*) => { $(if let Some(v) = args.$field { g.$field = v; })* };
    }
    set!(
        m,
        v,
        n,
        k,
        k_m,
        shape,
        overlap,
        function_fraction,
        function_block_fraction
    );
    if args.no_function_topic {
        g.function_topic = false;
    }
    let fraction_given =
        args.function_fraction.is_some() || file.generator.function_fraction.is_some();
    if !g.function_topic && !fraction_given {
        g.function_fraction = 0.0;
    }
    g.seed = seed.or(file.seed).unwrap_or(0);
    g
}

fn resolve_hyper(
    preset: Option<Preset>,
    file: &HyperSection,
    flags: &HyperArgs,
) -> Result<DirichletHyperparams, CliError> {
    let base = preset.map(Preset::hyper).unwrap_or_default();
    let alpha = flags.alpha.or(file.alpha).unwrap_or(base.alpha);
    let beta = flags.beta.or(file.beta).unwrap_or(base.beta);
    Ok(DirichletHyperparams::new(alpha, beta)?)
}

fn apply_gibbs_section(c: &mut GibbsConfig, s: &GibbsSection) {
    if let Some(v) = s.iterations {
        c.iterations = v;
    }
    if let Some(v) = s.burn_in_fraction {
        c.burn_in_fraction = v;
    }
    if let Some(v) = s.thin {
        c.thin = v;
    }
    if let Some(v) = s.estimator {
        c.estimator = v;
    }
}

fn apply_vb_section(c: &mut VbConfig, s: &VbSection) {
    if let Some(v) = s.epochs {
        c.epochs = v;
    }
    if let Some(v) = s.inner_doc_iters {
        c.inner_doc_iters = v;
    }
    if let Some(v) = s.doc_convergence_tol {
        c.doc_convergence_tol = v;
    }
    if let Some(v) = s.elbo_tol {
        c.elbo_tol = v;
    }
    if let Some(v) = s.init_noise {
        c.init_noise = v;
    }
}

fn generate(a: GenerateArgs) -> Result<(), CliError> {
    let file = ConfigFile::load(a.config.as_deref())?;
    let config = generator_config(&a.generator, &file, a.seed);
    let (corpus, truth) = generate_corpus(&config)?;
    write_corpus(&a.out, &corpus, &truth)?;
    eprintln!(
        "wrote {} documents of {} tokens to {}",
        corpus.num_docs(),
        config.n,
        a.out.display()
    );
    Ok(())
}

fn fit(a: FitArgs) -> Result<(), CliError> {
    let gibbs_only = [
        ("--iters", a.iters.is_some()),
        ("--burn-in", a.burn_in.is_some()),
        ("--thin", a.thin.is_some()),
        ("--estimator", a.estimator.is_some()),
    ];
    let conflict = match a.algorithm {
        Algorithm::Vb => gibbs_only.iter().find(|(_, set)| *set).map(|(f, _)| *f),
        Algorithm::Gibbs => a.epochs.is_some().then_some("--epochs"),
    };
    if let Some(flag) = conflict {
        return Err(CliError::Usage(format!(
            "{flag} cannot be used with --algo {}",
            a.algorithm
        )));
    }
    let file = ConfigFile::load(a.config.as_deref())?;
    let (corpus, truth) = read_corpus(&a.corpus)?;
    let k = a.k.unwrap_or(truth.num_topics());
    let hyper = resolve_hyper(a.preset.or(file.preset), &file.hyper, &a.hyper)?;
    let seed = a
        .seed
        .or(file.seed)
        .unwrap_or_else(|| a.algorithm.fit_seed(corpus.seed));
    let result = match a.algorithm {
        Algorithm::Gibbs => {
            let mut c = GibbsConfig::new(k, hyper, seed);
            apply_gibbs_section(&mut c, &file.gibbs);
            if let Some(v) = a.iters {
                c.iterations = v;
            }
            if let Some(v) = a.burn_in {
                c.burn_in_fraction = v;
            }
            if let Some(v) = a.thin {
                c.thin = v;
            }
            if let Some(e) = a.estimator {
                c.estimator = match e {
                    Estimator::ThinnedMean => GibbsEstimator::ThinnedMean,
                    Estimator::FinalState => GibbsEstimator::FinalState,
                };
            }
            gibbs_fit(&corpus, &c)?
        }
        Algorithm::Vb => {
            let mut c = VbConfig::new(k, hyper, seed);
            apply_vb_section(&mut c, &file.vb);
            if let Some(v) = a.epochs {
                c.epochs = v;
            }
            vb_fit(&corpus, &c)?
        }
    };
    let out = a
        .out
        .unwrap_or_else(|| a.corpus.join(format!("fit_{}.json", a.algorithm)));
    json::write_file(&out, &result)?;
    eprintln!(
        "{} fit with K = {k} after {} iterations, written to {}",
        a.algorithm,
        result.iterations,
        out.display()
    );
    Ok(())
}

fn eval(a: EvalArgs) -> Result<(), CliError> {
    let fit: FitResult = json::read_file(&a.fit)?;
    let (_, truth) = read_ground_truth(&a.truth)?;
    let report = align_topics(&truth.phi, &fit.phi_hat)?;
    let out = a.out.unwrap_or_else(|| {
        a.fit
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join("eval.json")
    });
    json::write_file(&out, &report)?;
    println!("{:.6}", report.average_kld);
    Ok(())
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn jobs(flag: Option<usize>) -> Result<usize, CliError> {
    match flag {
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => Ok(n),
        None => Ok(default_jobs()),
    }
}

fn experiment_spec(
    a: &ExperimentArgs,
    file: &ConfigFile,
    default_m: Vec<usize>,
) -> Result<(ExperimentSpec, Preset), CliError> {
    let preset = a.preset.or(file.preset).unwrap_or(Preset::Smaller);
    let fast = a.fast || file.experiment.fast.unwrap_or(false);
    let seed = a.seed.or(file.seed).unwrap_or(0);
    let mut spec = ExperimentSpec::from_preset(preset, seed, fast, a.out.clone());
    apply_generator_section(&mut spec.generator, &file.generator);
    let k = spec.generator.k;
    let hyper = resolve_hyper(Some(preset), &file.hyper, &a.hyper)?;
    spec.gibbs.k = k;
    spec.gibbs.hyper = hyper;
    spec.vb.k = k;
    spec.vb.hyper = hyper;
    apply_gibbs_section(&mut spec.gibbs, &file.gibbs);
    apply_vb_section(&mut spec.vb, &file.vb);
    if let Some(v) = a.iters {
        spec.gibbs.iterations = v;
    }
    if let Some(v) = a.epochs {
        spec.vb.epochs = v;
    }
    if let Some(d) = a.dataset.clone().or(file.experiment.dataset.clone()) {
        spec.dataset = d;
    }
    spec.m_values = a
        .m_values
        .clone()
        .or(file.experiment.m_values.clone())
        .unwrap_or(default_m);
    if let Some(g) = a.group_size.or(file.experiment.group_size) {
        spec.group_size = g;
    }
    let c = &file.coherence;
    if let Some(v) = c.top_n {
        spec.coherence.top_n = v;
    }
    if let Some(v) = c.window {
        spec.coherence.window = v;
    }
    if let Some(v) = c.epsilon {
        spec.coherence.epsilon = v;
    }
    Ok((spec, preset))
}

fn format_values(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn csv_row(s: &GroupSummary) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        s.m,
        s.algorithm,
        s.median,
        s.q1,
        s.q3,
        s.whisker_low,
        s.whisker_high,
        format_values(&s.outliers),
        format_values(&s.values)
    )
}

const CSV_HEADER: &str = "M,algorithm,median,q1,q3,whisker_low,whisker_high,outliers,values";

fn print_kld(summaries: &[GroupSummary], format: Option<Format>) -> Result<(), CliError> {
    for s in summaries {
        eprintln!(
            "M = {:>4}  {:<5}  median {:.4}  IQR [{:.4}, {:.4}]  n = {}",
            s.m,
            s.algorithm,
            s.median,
            s.q1,
            s.q3,
            s.values.len()
        );
    }
    let mut out = std::io::stdout().lock();
    match format {
        None => {}
        Some(Format::Json) => {
            out.write_all(&json::to_vec(summaries)?)?;
            writeln!(out)?;
        }
        Some(Format::Csv) => {
            writeln!(out, "{CSV_HEADER}")?;
            for s in summaries {
                writeln!(out, "{}", csv_row(s))?;
            }
        }
    }
    Ok(())
}

fn print_coherence(summaries: &[CoherenceSummary], format: Option<Format>) -> Result<(), CliError> {
    for c in summaries {
        let s = &c.summary;
        eprintln!(
            "M = {:>4}  K = {:>2}  {:<5}  median C_v {:.4}  IQR [{:.4}, {:.4}]",
            s.m, c.k, s.algorithm, s.median, s.q1, s.q3
        );
    }
    let mut out = std::io::stdout().lock();
    match format {
        None => {}
        Some(Format::Json) => {
            out.write_all(&json::to_vec(summaries)?)?;
            writeln!(out)?;
        }
        Some(Format::Csv) => {
            writeln!(out, "K,{CSV_HEADER}")?;
            for c in summaries {
                writeln!(out, "{},{}", c.k, csv_row(&c.summary))?;
            }
        }
    }
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<(), CliError> {
    let jobs = jobs(a.jobs)?;
    let file = ConfigFile::load(a.config.as_deref())?;
    let (spec, _) = experiment_spec(&a, &file, DEFAULT_M_VALUES.to_vec())?;
    let outcome = run_experiment(&spec, jobs)?;
    eprintln!("wrote {}", spec.dataset_dir().display());
    print_kld(&outcome.summaries, a.format)
}

fn coherence(a: CoherenceArgs) -> Result<(), CliError> {
    let jobs = jobs(a.common.jobs)?;
    let file = ConfigFile::load(a.common.config.as_deref())?;
    let preset = a.common.preset.or(file.preset).unwrap_or(Preset::Smaller);
    let (default_m, default_k) = preset.coherence_defaults();
    let (mut spec, _) = experiment_spec(&a.common, &file, vec![default_m])?;
    let ks = match &a.k_values {
        Some(s) => crate::args::parse_k_values(s).map_err(CliError::Usage)?,
        None => file
            .experiment
            .k_values
            .clone()
            .unwrap_or_else(|| default_k.collect()),
    };
    spec.k_values = Some(ks);
    if let Some(v) = a.top_n {
        spec.coherence.top_n = v;
    }
    if let Some(v) = a.window {
        spec.coherence.window = v;
    }
    let outcome = coherence_sweep(&spec, jobs)?;
    eprintln!("wrote {}", spec.dataset_dir().display());
    print_coherence(&outcome.summaries, a.common.format)
}

fn serve(a: ServeArgs) -> Result<(), CliError> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(service::serve(a.listen))?;
    Ok(())
}

fn verify_tree(a: VerifyArgs) -> Result<(), CliError> {
    let jobs = jobs(a.jobs)?;
    let dir: PathBuf = a.dir;
    let report = verify(&dir, jobs)?;
    if report.ok() {
        println!("verified {} artifacts in {}", report.checked, dir.display());
        Ok(())
    } else {
        for m in &report.mismatches {
            eprintln!("mismatch: {m}");
        }
        Err(CliError::Failed(format!(
            "{} of {} artifacts do not reproduce",
            report.mismatches.len(),
            report.checked
        )))
    }
}
