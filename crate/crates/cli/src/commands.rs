use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ising_impute::fit::{fit_all, ChainConfig, FitResult, Method};
use ising_impute::io::{
    network_dot, read_dataset, read_matrix_json, read_restricted, vech_labels, write_dataset, write_draws,
    write_matrix_json, write_table,
};
use ising_impute::pg::{pg_mean, sample_pg1};
use ising_impute::study::{
    estimate_rows, generate_dataset, mse_bias_rows, recovery_rows, roc_rows, run_study, StudyConfig,
    ESTIMATE_HEADER, MSE_BIAS_HEADER, RECOVERY_HEADER, ROC_HEADER,
};
use ising_impute::{recover_from_restricted, IsingMatrix, MissingnessSpec, RngStream, Study};
use serde::Serialize;

use crate::args::{ChainArgs, Command, FitArgs, MethodArg, PgTestArgs, RecoverArgs, ReplayArgs, SimulateArgs, StudyArgs,
    TruthKind};
use crate::manifest::{digest_inputs, digest_outputs, RunManifest, MANIFEST_FILE};
use crate::CliError;

struct Outcome {
    out_dir: PathBuf,
    inputs: Vec<PathBuf>,
    outputs: Vec<String>,
    seed: Option<u64>,
    config: Option<serde_json::Value>,
    /// Reported after the manifest is written.
    deferred: Option<CliError>,
}

pub fn run(command: Command) -> Result<(), CliError> {
    if let Command::Replay(args) = command {
        return replay(&args);
    }
    let started = Instant::now();
    let outcome = execute(&command)?;
    let inputs: Vec<&Path> = outcome.inputs.iter().map(PathBuf::as_path).collect();
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        invocation: command,
        seed: outcome.seed,
        config: outcome.config,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        inputs: digest_inputs(&inputs)?,
        outputs: digest_outputs(&outcome.out_dir, &outcome.outputs)?,
    };
    manifest.write(&outcome.out_dir)?;
    match outcome.deferred {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn execute(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Study(a) => study(a),
        Command::PgTest(a) => pg_test(a),
        Command::Recover(a) => recover(a),
        Command::Replay(_) => unreachable!("handled by run"),
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::io(path, e))
}

fn resolve_chain(args: &ChainArgs) -> Result<ChainConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => serde_json::from_reader(open(path)?)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?,
        None => ChainConfig::default(),
    };
    if let Some(v) = args.iterations {
        cfg.total_iterations = v;
    }
    if let Some(v) = args.burn_in {
        cfg.burn_in = v;
    }
    if let Some(v) = args.thinning {
        cfg.thinning = v;
    }
    if let Some(v) = args.chains {
        cfg.n_chains = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.intercept_variance {
        cfg.priors.intercept_variance = v;
    }
    if let Some(v) = args.slope_variance {
        cfg.priors.slope_variance = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn to_value<T: Serialize>(v: &T) -> Option<serde_json::Value> {
    serde_json::to_value(v).ok()
}

fn simulate(a: &SimulateArgs) -> Result<Outcome, CliError> {
    let mut inputs = Vec::new();
    let (truth, default_spec) = match (a.study, a.s, &a.truth) {
        (Some(id), _, _) => {
            let study = Study::from(id);
            (study.true_parameters(), study.missingness())
        }
        (None, Some(TruthKind::Zero), None) => {
            let j = a.j.ok_or_else(|| CliError::validation("--s needs --j"))?;
            if j == 0 {
                return Err(CliError::validation("--j must be at least 1"));
            }
            (IsingMatrix::zeros(j), MissingnessSpec::None)
        }
        (None, None, Some(path)) => {
            inputs.push(path.clone());
            (read_matrix_json(open(path)?)?, MissingnessSpec::None)
        }
        _ => return Err(CliError::validation("give one of --study, --j with --s, or --truth")),
    };
    let spec = match &a.missingness {
        Some(path) => {
            inputs.push(path.clone());
            serde_json::from_reader(open(path)?)
                .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?
        }
        None => default_spec,
    };
    let (_, observed) = generate_dataset(&truth, a.n, &spec, a.seed)?;
    create_dir(&a.out_dir)?;
    write_dataset(&observed, create(&a.out_dir.join("data.csv"))?)?;
    write_matrix_json(&truth, create(&a.out_dir.join("truth.json"))?)?;
    println!(
        "wrote {} rows x {} items ({} missing cells) to {}",
        observed.n_rows(),
        observed.n_items(),
        observed.missing_count(),
        a.out_dir.display()
    );
    Ok(Outcome {
        out_dir: a.out_dir.clone(),
        inputs,
        outputs: vec!["data.csv".into(), "truth.json".into()],
        seed: Some(a.seed),
        config: to_value(&spec),
        deferred: None,
    })
}

fn methods_of(arg: MethodArg) -> Vec<Method> {
    match arg {
        MethodArg::Proposed => vec![Method::Proposed],
        MethodArg::Single => vec![Method::SingleImputation],
        MethodArg::Complete => vec![Method::CompleteCase],
        MethodArg::All => Method::ALL.to_vec(),
    }
}

#[derive(Serialize)]
struct DiagnosticsFile<'a> {
    method: Method,
    chains: usize,
    retained_per_chain: usize,
    parameters: Vec<String>,
    psrf: Option<&'a [f64]>,
    max_psrf: Option<f64>,
    draws_symmetric: bool,
    observed_cells_preserved: bool,
}

fn write_fit(fit: &FitResult, dir: &Path, viz_threshold: f64) -> Result<Vec<String>, CliError> {
    let tag = fit.method.tag();
    let names = [
        format!("{tag}_estimate.json"),
        format!("{tag}_draws.csv"),
        format!("{tag}_diagnostics.json"),
        format!("{tag}_network.dot"),
    ];
    write_matrix_json(&fit.estimate, create(&dir.join(&names[0]))?)?;
    write_draws(fit, create(&dir.join(&names[1]))?)?;
    let d = &fit.diagnostics;
    let diag = DiagnosticsFile {
        method: fit.method,
        chains: fit.chains.len(),
        retained_per_chain: d.retained_per_chain,
        parameters: vech_labels(fit.estimate.dim()),
        psrf: d.psrf.as_deref(),
        max_psrf: d.max_psrf,
        draws_symmetric: d.draws_symmetric,
        observed_cells_preserved: d.observed_cells_preserved,
    };
    let path = dir.join(&names[2]);
    serde_json::to_writer_pretty(create(&path)?, &diag).map_err(|e| CliError::validation(e.to_string()))?;
    let path = dir.join(&names[3]);
    fs::write(&path, network_dot(&fit.estimate, viz_threshold)).map_err(|e| CliError::io(&path, e))?;
    Ok(names.to_vec())
}

fn fit(a: &FitArgs) -> Result<Outcome, CliError> {
    let cfg = resolve_chain(&a.chain)?;
    let data = read_dataset(open(&a.data)?)?;
    create_dir(&a.out_dir)?;
    let mut outputs = Vec::new();
    let mut deferred = None;
    for (method, result) in fit_all(&data, &cfg, &methods_of(a.method))? {
        match result {
            Ok(f) => {
                outputs.extend(write_fit(&f, &a.out_dir, a.viz_threshold)?);
                let s = &f.estimate;
                let summary = if s.dim() >= 2 {
                    format!(" s_2_1 = {:.4}", s.get(1, 0))
                } else {
                    String::new()
                };
                match f.diagnostics.max_psrf {
                    Some(r) => println!("{method}:{summary} max PSRF = {r:.4}"),
                    None => println!("{method}:{summary}"),
                }
            }
            Err(e) => {
                eprintln!("{method}: {e}");
                deferred.get_or_insert(CliError::from(e));
            }
        }
    }
    Ok(Outcome {
        out_dir: a.out_dir.clone(),
        inputs: vec![a.data.clone()],
        outputs,
        seed: Some(cfg.seed),
        config: to_value(&cfg),
        deferred,
    })
}

fn study(a: &StudyArgs) -> Result<Outcome, CliError> {
    let study = Study::from(a.study);
    let chain = resolve_chain(&a.chain)?;
    let mut cfg = StudyConfig::new(study, a.n.clone(), a.reps, chain.seed);
    cfg.chain = chain;
    if let Some(m) = &a.methods {
        let mut methods: Vec<Method> = m.iter().flat_map(|&x| methods_of(x)).collect();
        methods.dedup();
        cfg.methods = methods;
    }
    cfg.jaccard_thresholds = a.jaccard.clone();
    if a.reps == 0 || a.n.is_empty() {
        return Err(CliError::validation("need at least one replication and one sample size"));
    }
    let outcome = run_study(&cfg)?;
    create_dir(&a.out_dir)?;
    let mut outputs = vec!["mse_bias.csv".to_string(), "estimates.csv".to_string()];
    write_table(&MSE_BIAS_HEADER, &mse_bias_rows(&outcome), create(&a.out_dir.join(&outputs[0]))?)?;
    write_table(&ESTIMATE_HEADER, &estimate_rows(&outcome), create(&a.out_dir.join(&outputs[1]))?)?;
    if study == Study::Three {
        outputs.push("roc.csv".into());
        outputs.push("recovery.csv".into());
        write_table(&ROC_HEADER, &roc_rows(&outcome), create(&a.out_dir.join("roc.csv"))?)?;
        write_table(&RECOVERY_HEADER, &recovery_rows(&outcome), create(&a.out_dir.join("recovery.csv"))?)?;
    }
    for cell in &outcome.cells {
        let median = cell
            .metrics
            .as_ref()
            .map(|m| ising_impute::metrics::median(&m.edge_mse()))
            .unwrap_or(f64::NAN);
        print!(
            "N={} {}: {} fits, median edge MSE {:.5}",
            cell.n,
            cell.method,
            cell.estimates.len(),
            median
        );
        if let Some(auc) = cell.auc {
            print!(", AUC {auc:.4}");
        }
        if !cell.failures.is_empty() {
            print!(", {} failed ({})", cell.failures.len(), cell.failures[0].1);
        }
        println!();
    }
    Ok(Outcome {
        out_dir: a.out_dir.clone(),
        inputs: a.chain.config.iter().cloned().collect(),
        outputs,
        seed: Some(cfg.seed),
        config: to_value(&cfg),
        deferred: None,
    })
}

fn pg_test(a: &PgTestArgs) -> Result<Outcome, CliError> {
    if a.draws < 2 {
        return Err(CliError::validation("--draws must be at least 2"));
    }
    if let Some(c) = a.c.iter().find(|c| !c.is_finite()) {
        return Err(CliError::validation(format!("c = {c} is not finite")));
    }
    let mut rows = Vec::new();
    for (k, &c) in a.c.iter().enumerate() {
        let mut rng = RngStream::new(a.seed, k as u64);
        let draws: Vec<f64> = (0..a.draws).map(|_| sample_pg1(c, &mut rng)).collect();
        let n = a.draws as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let expected = pg_mean(c);
        let z = (mean - expected) / (var / n).sqrt();
        println!("c = {c}: mean {mean:.6}, expected {expected:.6}, z = {z:.3}");
        rows.push(vec![
            c.to_string(),
            a.draws.to_string(),
            mean.to_string(),
            expected.to_string(),
            z.to_string(),
        ]);
    }
    create_dir(&a.out_dir)?;
    let name = "pg_test.csv".to_string();
    write_table(
        &["c", "n_draws", "empirical_mean", "pg_mean", "z_score"],
        &rows,
        create(&a.out_dir.join(&name))?,
    )?;
    Ok(Outcome {
        out_dir: a.out_dir.clone(),
        inputs: Vec::new(),
        outputs: vec![name],
        seed: Some(a.seed),
        config: None,
        deferred: None,
    })
}

fn recover(a: &RecoverArgs) -> Result<Outcome, CliError> {
    let table = read_restricted(open(&a.table)?)?;
    let s = recover_from_restricted(&table)?;
    create_dir(&a.out_dir)?;
    let name = "recovered.json".to_string();
    write_matrix_json(&s, create(&a.out_dir.join(&name))?)?;
    println!("recovered {} x {} matrix", s.dim(), s.dim());
    Ok(Outcome {
        out_dir: a.out_dir.clone(),
        inputs: vec![a.table.clone()],
        outputs: vec![name],
        seed: None,
        config: None,
        deferred: None,
    })
}

fn with_out_dir(command: &Command, dir: PathBuf) -> Command {
    let mut c = command.clone();
    match &mut c {
        Command::Simulate(a) => a.out_dir = dir,
        Command::Fit(a) => a.out_dir = dir,
        Command::Study(a) => a.out_dir = dir,
        Command::PgTest(a) => a.out_dir = dir,
        Command::Recover(a) => a.out_dir = dir,
        Command::Replay(_) => {}
    }
    c
}

fn out_dir_of(command: &Command) -> Option<&Path> {
    match command {
        Command::Simulate(a) => Some(&a.out_dir),
        Command::Fit(a) => Some(&a.out_dir),
        Command::Study(a) => Some(&a.out_dir),
        Command::PgTest(a) => Some(&a.out_dir),
        Command::Recover(a) => Some(&a.out_dir),
        Command::Replay(_) => None,
    }
}

fn replay(a: &ReplayArgs) -> Result<(), CliError> {
    let recorded = RunManifest::read(&a.manifest)?;
    if matches!(recorded.invocation, Command::Replay(_)) {
        return Err(CliError::validation("a replay manifest cannot be replayed"));
    }
    for input in &recorded.inputs {
        let now = crate::manifest::sha256_file(&input.path)?;
        if now != input.sha256 {
            return Err(CliError::failure(format!("input {} changed since the recorded run", input.path.display())));
        }
    }
    let command = match &a.out_dir {
        Some(dir) => with_out_dir(&recorded.invocation, dir.clone()),
        None => recorded.invocation.clone(),
    };
    let dir = out_dir_of(&command).expect("not a replay").to_path_buf();
    if a.out_dir.is_none() && a.manifest.parent().map(|p| p.join(MANIFEST_FILE)) == Some(dir.join(MANIFEST_FILE)) {
        eprintln!("note: re-running in place; the manifest will be rewritten");
    }
    run(command)?;
    let fresh = RunManifest::read(&dir.join(MANIFEST_FILE))?;
    let mut mismatches = Vec::new();
    for old in &recorded.outputs {
        match fresh.outputs.iter().find(|f| f.path == old.path) {
            Some(new) if new.sha256 == old.sha256 => {}
            Some(_) => mismatches.push(format!("{} differs", old.path.display())),
            None => mismatches.push(format!("{} was not produced", old.path.display())),
        }
    }
    if mismatches.is_empty() {
        println!("replay reproduced {} output file(s) byte for byte", recorded.outputs.len());
        Ok(())
    } else {
        Err(CliError::failure(format!("replay mismatch: {}", mismatches.join(", "))))
    }
}
